#pragma once
// Object-centric observations: ordered per-entity feature vectors.

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpn/goal.hpp"

namespace rpn {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureBlock {
  std::string name;
  int offset = 0;
  int width = 0;
  bool one_hot = false;
};

struct FeatureLayout {
  std::vector<FeatureBlock> blocks;
  int dim() const {
    int d = 0;
    for (const auto& b : blocks) d = std::max(d, b.offset + b.width);
    return d;
  }
};

// An entity is an object or an ordered object pair (for binary relations).
struct EntityKey {
  EntityIndex first = kNoEntity;
  EntityIndex second = kNoEntity;
  bool is_pair() const { return second != kNoEntity; }
  friend bool operator==(const EntityKey&, const EntityKey&) = default;
};

inline EntityKey entity_key_of(const Atom& a) {
  return a.arity == 1 ? EntityKey{a.args[0], kNoEntity} : EntityKey{a.args[0], a.args[1]};
}

class EntitySet {
 public:
  EntitySet() = default;
  EntitySet(std::shared_ptr<const std::vector<EntityKey>> keys, FeatureMatrix features)
      : keys_(std::move(keys)), features_(std::move(features)) {
    if (!keys_ || static_cast<Eigen::Index>(keys_->size()) != features_.rows())
      throw std::invalid_argument("EntitySet: roster/feature row mismatch");
  }

  std::size_t size() const { return keys_ ? keys_->size() : 0; }
  int dim() const { return static_cast<int>(features_.cols()); }
  const std::vector<EntityKey>& keys() const { return *keys_; }
  const FeatureMatrix& features() const { return features_; }
  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * features_.cols(), static_cast<std::size_t>(features_.cols())};
  }

  std::optional<std::size_t> row_of(const EntityKey& k) const {
    for (std::size_t i = 0; i < keys_->size(); ++i)
      if ((*keys_)[i] == k) return i;
    return std::nullopt;
  }

  friend bool operator==(const EntitySet& a, const EntitySet& b) {
    return a.size() == b.size() && (a.size() == 0 || (a.keys() == b.keys() && a.features_ == b.features_));
  }

 private:
  std::shared_ptr<const std::vector<EntityKey>> keys_;
  FeatureMatrix features_;
};

enum class PlanErrc { MissingEntity };

class PlanningError : public std::runtime_error {
 public:
  PlanningError(PlanErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  PlanErrc code() const { return code_; }

 private:
  PlanErrc code_;
};

// Schema, node space, fixed entity roster and the node -> entity-row map.
class PlanningSpace {
 public:
  PlanningSpace() = default;
  PlanningSpace(DomainSchema schema, std::vector<EntityKey> roster, FeatureLayout layout)
      : schema_(std::move(schema)),
        nodes_(schema_),
        roster_(std::make_shared<const std::vector<EntityKey>>(std::move(roster))),
        layout_(std::move(layout)) {
    if (layout_.dim() != schema_.feature_dim()) throw std::invalid_argument("layout/feature_dim mismatch");
    node_row_.reserve(nodes_.size());
    for (const auto& a : nodes_.slots()) {
      auto k = entity_key_of(a);
      std::size_t r = 0;
      for (; r < roster_->size(); ++r)
        if ((*roster_)[r] == k) break;
      if (r == roster_->size()) throw std::invalid_argument("ground atom without an entity row");
      node_row_.push_back(static_cast<int>(r));
    }
  }

  const DomainSchema& schema() const { return schema_; }
  const NodeSpace& nodes() const { return nodes_; }
  const std::shared_ptr<const std::vector<EntityKey>>& roster() const { return roster_; }
  const FeatureLayout& layout() const { return layout_; }
  int feature_dim() const { return schema_.feature_dim(); }
  int num_predicates() const { return static_cast<int>(schema_.predicates().size()); }
  int node_row(std::size_t node) const { return node_row_.at(node); }
  const std::vector<int>& node_rows() const { return node_row_; }

  std::size_t node_of(const Atom& a) const {
    auto n = nodes_.index_of(a);
    if (!n) throw PlanningError(PlanErrc::MissingEntity, "no ground slot for " + format_atom(a, schema_));
    return *n;
  }

 private:
  DomainSchema schema_;
  NodeSpace nodes_;
  std::shared_ptr<const std::vector<EntityKey>> roster_;
  FeatureLayout layout_;
  std::vector<int> node_row_;
};

}  // namespace rpn
