#pragma once
// Symbolic planning space: predicates, grounded atoms and conjunctive goals.
//
// Goal text grammar (whitespace-insensitive):
//   goal := term ("&" term)*
//   term := "!"? IDENT "(" IDENT ("," IDENT)* ")"

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rpn {

using EntityIndex = std::uint16_t;
using PredicateIndex = std::uint8_t;
inline constexpr EntityIndex kNoEntity = 0xFFFF;

enum class GoalErrc {
  UnknownPredicate,
  UnknownEntity,
  ArityMismatch,
  EmptyGoal,
  SyntaxError,
  DuplicateAtom,
  Contradiction,
  InvalidSchema,
};

inline const char* to_string(GoalErrc c) {
  switch (c) {
    case GoalErrc::UnknownPredicate: return "UnknownPredicate";
    case GoalErrc::UnknownEntity: return "UnknownEntity";
    case GoalErrc::ArityMismatch: return "ArityMismatch";
    case GoalErrc::EmptyGoal: return "EmptyGoal";
    case GoalErrc::SyntaxError: return "SyntaxError";
    case GoalErrc::DuplicateAtom: return "DuplicateAtom";
    case GoalErrc::Contradiction: return "Contradiction";
    case GoalErrc::InvalidSchema: return "InvalidSchema";
  }
  return "?";
}

class GoalError : public std::runtime_error {
 public:
  GoalError(GoalErrc code, std::string token, std::size_t position)
      : std::runtime_error(std::string(to_string(code)) + " at " + std::to_string(position) +
                           (token.empty() ? std::string() : ": '" + token + "'")),
        code_(code),
        token_(std::move(token)),
        position_(position) {}

  GoalErrc code() const { return code_; }
  const std::string& token() const { return token_; }
  std::size_t position() const { return position_; }

 private:
  GoalErrc code_;
  std::string token_;
  std::size_t position_;
};

struct Predicate {
  std::string name;
  int arity = 1;
  // Admissible entity-kind tuples; each has `arity` entries. Grounding
  // enumerates only argument tuples whose kinds match one of these.
  std::vector<std::vector<std::string>> signatures;
};

struct EntityDecl {
  std::string id;
  std::string kind;
};

class DomainSchema {
 public:
  DomainSchema() = default;

  DomainSchema(std::string name, std::vector<Predicate> predicates, std::vector<EntityDecl> entities,
               int feature_dim)
      : name_(std::move(name)),
        predicates_(std::move(predicates)),
        entities_(std::move(entities)),
        feature_dim_(feature_dim) {
    if (feature_dim_ <= 0) throw GoalError(GoalErrc::InvalidSchema, "feature_dim", 0);
    if (predicates_.size() > 255 || entities_.size() >= kNoEntity)
      throw GoalError(GoalErrc::InvalidSchema, "size", 0);
    for (std::size_t i = 0; i < predicates_.size(); ++i) {
      const auto& p = predicates_[i];
      if (p.name.empty() || (p.arity != 1 && p.arity != 2))
        throw GoalError(GoalErrc::InvalidSchema, p.name, i);
      for (const auto& sig : p.signatures)
        if (static_cast<int>(sig.size()) != p.arity) throw GoalError(GoalErrc::InvalidSchema, p.name, i);
      if (!pred_index_.emplace(p.name, static_cast<PredicateIndex>(i)).second)
        throw GoalError(GoalErrc::InvalidSchema, p.name, i);
    }
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      if (entities_[i].id.empty() || !entity_index_.emplace(entities_[i].id, static_cast<EntityIndex>(i)).second)
        throw GoalError(GoalErrc::InvalidSchema, entities_[i].id, i);
    }
  }

  const std::string& name() const { return name_; }
  const std::vector<Predicate>& predicates() const { return predicates_; }
  const std::vector<EntityDecl>& entities() const { return entities_; }
  int feature_dim() const { return feature_dim_; }
  const Predicate& predicate(PredicateIndex p) const { return predicates_.at(p); }
  const EntityDecl& entity(EntityIndex e) const { return entities_.at(e); }

  std::optional<PredicateIndex> find_predicate(std::string_view name) const {
    auto it = pred_index_.find(std::string(name));
    if (it == pred_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<EntityIndex> find_entity(std::string_view id) const {
    auto it = entity_index_.find(std::string(id));
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
  }

  // Requires the predicate name to exist; for building atoms in code.
  PredicateIndex predicate_index(std::string_view name) const {
    auto p = find_predicate(name);
    if (!p) throw GoalError(GoalErrc::UnknownPredicate, std::string(name), 0);
    return *p;
  }
  EntityIndex entity_index(std::string_view id) const {
    auto e = find_entity(id);
    if (!e) throw GoalError(GoalErrc::UnknownEntity, std::string(id), 0);
    return *e;
  }

 private:
  std::string name_;
  std::vector<Predicate> predicates_;
  std::vector<EntityDecl> entities_;
  int feature_dim_ = 1;
  std::unordered_map<std::string, PredicateIndex> pred_index_;
  std::unordered_map<std::string, EntityIndex> entity_index_;
};

struct Atom {
  PredicateIndex predicate = 0;
  std::uint8_t arity = 1;
  std::array<EntityIndex, 2> args{kNoEntity, kNoEntity};
  bool negated = false;

  static Atom unary(PredicateIndex p, EntityIndex a, bool neg = false) { return Atom{p, 1, {a, kNoEntity}, neg}; }
  static Atom binary(PredicateIndex p, EntityIndex a, EntityIndex b, bool neg = false) {
    return Atom{p, 2, {a, b}, neg};
  }

  Atom positive() const {
    Atom a = *this;
    a.negated = false;
    return a;
  }
  Atom negation() const {
    Atom a = *this;
    a.negated = !negated;
    return a;
  }
  bool same_slot(const Atom& o) const { return positive() == o.positive(); }

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

// Conjunction of atoms. Keeps the given order; equality ignores it.
class Goal {
 public:
  Goal() = default;

  explicit Goal(std::vector<Atom> atoms) {
    for (const auto& a : atoms) push_back(a);
  }

  static Goal single(const Atom& a) { return Goal(std::vector<Atom>{a}); }

  void push_back(const Atom& a) {
    for (const auto& b : atoms_) {
      if (b == a) throw GoalError(GoalErrc::DuplicateAtom, "", atoms_.size());
      if (b == a.negation()) throw GoalError(GoalErrc::Contradiction, "", atoms_.size());
    }
    atoms_.push_back(a);
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

  bool contains(const Atom& a) const { return std::find(atoms_.begin(), atoms_.end(), a) != atoms_.end(); }

  Goal subset(const std::vector<std::size_t>& indices) const {
    Goal g;
    for (auto i : indices) g.atoms_.push_back(atoms_.at(i));
    return g;
  }

  friend bool operator==(const Goal& a, const Goal& b) {
    if (a.size() != b.size()) return false;
    return std::all_of(a.begin(), a.end(), [&](const Atom& x) { return b.contains(x); });
  }

 private:
  std::vector<Atom> atoms_;
};

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class GoalParser {
 public:
  GoalParser(std::string_view text, const DomainSchema& schema) : text_(text), schema_(schema) {}

  Goal parse() {
    skip_ws();
    if (pos_ == text_.size()) throw GoalError(GoalErrc::EmptyGoal, "", 0);
    Goal g;
    while (true) {
      std::size_t term_pos = pos_;
      Atom a = term();
      try {
        g.push_back(a);
      } catch (const GoalError& e) {
        throw GoalError(e.code(), std::string(text_.substr(term_pos, pos_ - term_pos)), term_pos);
      }
      skip_ws();
      if (pos_ == text_.size()) break;
      expect('&');
    }
    return g;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void syntax_error() {
    std::string tok = pos_ < text_.size() ? std::string(1, text_[pos_]) : std::string("<end>");
    throw GoalError(GoalErrc::SyntaxError, tok, pos_);
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) syntax_error();
    ++pos_;
  }

  std::pair<std::string_view, std::size_t> ident() {
    skip_ws();
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) syntax_error();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return {text_.substr(start, pos_ - start), start};
  }

  Atom term() {
    skip_ws();
    bool neg = false;
    if (pos_ < text_.size() && text_[pos_] == '!') {
      neg = true;
      ++pos_;
    }
    auto [pname, ppos] = ident();
    auto pred = schema_.find_predicate(pname);
    if (!pred) throw GoalError(GoalErrc::UnknownPredicate, std::string(pname), ppos);
    expect('(');
    std::vector<std::pair<std::string_view, std::size_t>> args;
    args.push_back(ident());
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      args.push_back(ident());
      skip_ws();
    }
    expect(')');
    const auto& p = schema_.predicate(*pred);
    if (static_cast<int>(args.size()) != p.arity)
      throw GoalError(GoalErrc::ArityMismatch, std::string(pname), ppos);
    Atom a;
    a.predicate = *pred;
    a.arity = static_cast<std::uint8_t>(p.arity);
    a.negated = neg;
    for (std::size_t i = 0; i < args.size(); ++i) {
      auto e = schema_.find_entity(args[i].first);
      if (!e) throw GoalError(GoalErrc::UnknownEntity, std::string(args[i].first), args[i].second);
      a.args[i] = *e;
    }
    return a;
  }

  std::string_view text_;
  const DomainSchema& schema_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Goal parse_goal(std::string_view text, const DomainSchema& schema) {
  return detail::GoalParser(text, schema).parse();
}

inline std::string format_atom(const Atom& a, const DomainSchema& schema) {
  std::string s;
  if (a.negated) s += '!';
  s += schema.predicate(a.predicate).name;
  s += '(';
  for (int i = 0; i < a.arity; ++i) {
    if (i) s += ',';
    s += schema.entity(a.args[i]).id;
  }
  s += ')';
  return s;
}

inline std::string format_goal(const Goal& g, const DomainSchema& schema) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s += " & ";
    s += format_atom(g[i], schema);
  }
  return s;
}

// Every (predicate, entity tuple) admitted by the schema's kind signatures.
// Predicate-major, then roster order of the first and second argument.
inline std::vector<Atom> ground_atoms(const DomainSchema& schema) {
  std::vector<Atom> out;
  const auto& ents = schema.entities();
  auto admits = [](const Predicate& p, const std::string& k0, const std::string* k1) {
    for (const auto& sig : p.signatures) {
      if (sig[0] != k0) continue;
      if (k1 == nullptr || sig[1] == *k1) return true;
    }
    return false;
  };
  for (std::size_t pi = 0; pi < schema.predicates().size(); ++pi) {
    const auto& p = schema.predicates()[pi];
    for (std::size_t i = 0; i < ents.size(); ++i) {
      if (p.arity == 1) {
        if (admits(p, ents[i].kind, nullptr))
          out.push_back(Atom::unary(static_cast<PredicateIndex>(pi), static_cast<EntityIndex>(i)));
        continue;
      }
      for (std::size_t j = 0; j < ents.size(); ++j) {
        if (i == j) continue;
        if (admits(p, ents[i].kind, &ents[j].kind))
          out.push_back(Atom::binary(static_cast<PredicateIndex>(pi), static_cast<EntityIndex>(i),
                                     static_cast<EntityIndex>(j)));
      }
    }
  }
  return out;
}

// Indexed ground-atom slots; the classification node space of a domain.
class NodeSpace {
 public:
  NodeSpace() = default;
  explicit NodeSpace(const DomainSchema& schema) : slots_(ground_atoms(schema)) {
    for (std::size_t i = 0; i < slots_.size(); ++i) index_.emplace(key(slots_[i]), i);
  }

  const std::vector<Atom>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }
  const Atom& operator[](std::size_t i) const { return slots_[i]; }

  std::optional<std::size_t> index_of(const Atom& a) const {
    auto it = index_.find(key(a));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  static std::uint64_t key(const Atom& a) {
    return (std::uint64_t(a.predicate) << 32) | (std::uint64_t(a.args[0]) << 16) | a.args[1];
  }
  std::vector<Atom> slots_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace rpn
