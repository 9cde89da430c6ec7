#include "mixcheck/linearizer.hpp"

#include <algorithm>
#include <map>

namespace mixcheck {

namespace {

class Linearizer {
 public:
  explicit Linearizer(const Program& p) : program_(p) {}

  const std::vector<Ident>& of(const Ident& name) {
    auto it = memo_.find(name);
    if (it != memo_.end()) return it->second;
    if (std::find(stack_.begin(), stack_.end(), name) != stack_.end())
      throw Error("inheritance cycle through '" + name.str() + "'");
    const std::vector<Ident>* parents = nullptr;
    if (const auto* t = program_.find_trait(name.name())) {
      parents = &t->parents;
    } else if (const auto* c = program_.find_class(name.name())) {
      parents = &c->parents;
    } else {
      throw Error("unknown trait or class '" + name.str() + "'");
    }
    stack_.push_back(name);
    std::vector<Ident> order = compose(name, *parents);
    stack_.pop_back();
    return memo_.emplace(name, std::move(order)).first->second;
  }

  std::vector<Ident> compose(const Ident& owner, const std::vector<Ident>& parents) {
    std::vector<Ident> concat;
    for (auto it = parents.rbegin(); it != parents.rend(); ++it) {
      const auto& sub = of(*it);
      concat.insert(concat.end(), sub.begin(), sub.end());
    }
    std::vector<Ident> out{owner};
    for (std::size_t i = 0; i < concat.size(); ++i) {
      bool later = std::find(concat.begin() + static_cast<std::ptrdiff_t>(i) + 1, concat.end(), concat[i]) != concat.end();
      if (!later && !(concat[i] == owner)) out.push_back(concat[i]);
    }
    return out;
  }

 private:
  const Program& program_;
  std::map<Ident, std::vector<Ident>> memo_;
  std::vector<Ident> stack_;
};

}  // namespace

Ident anonymous_owner() { return Ident("<anon>"); }

Linearization linearize(const Program& p, const Ident& name) {
  Linearizer l(p);
  return {name, l.of(name)};
}

Linearization linearize_type_expr(const Program& p, const TypeExpr& t) {
  std::vector<Ident> parents{t.base};
  parents.insert(parents.end(), t.mixed.begin(), t.mixed.end());
  Linearizer l(p);
  Ident owner = anonymous_owner();
  return {owner, l.compose(owner, parents)};
}

std::string arrow_string(const Linearization& l) {
  std::string out;
  for (std::size_t i = 0; i < l.order.size(); ++i) {
    if (i) out += " ← ";
    out += l.order[i].str();
  }
  return out;
}

}  // namespace mixcheck
