#include "ancheck/shrink.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <optional>

namespace ancheck {

namespace {

using K = Value::Kind;
using Pred = std::function<bool(const Value&)>;

constexpr int kFloatBisections = 64;

constexpr long double kFar = std::numeric_limits<long double>::infinity();

std::optional<std::size_t> matching_item(const Value& v, const Froms& n) {
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    if (satisfies(v, Froms{{n.items[i]}})) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> matching_alternative(const Value& v, const Anys& n) {
  for (std::size_t i = 0; i < n.alternatives.size(); ++i) {
    if (satisfies(v, n.alternatives[i])) return i;
  }
  return std::nullopt;
}

double float_target(const Floats& f) {
  const auto w = float_window(f, DBL_MAX);
  if (!w) return 0.0;
  if (f.min) return w->lo;
  return std::clamp(0.0, w->lo, w->hi);
}

long double float_distance(double d, double target) {
  if (!std::isfinite(d)) return kFar;
  return std::fabs(static_cast<long double>(d) - static_cast<long double>(target));
}

long double int_distance(std::int64_t a, std::int64_t b) {
  return std::fabs(static_cast<long double>(a) - static_cast<long double>(b));
}

long double element_distance(const Value& e) {
  switch (e.kind()) {
    case K::Bool:
      return e.as_bool() ? 1 : 0;
    case K::Int:
      return int_distance(e.as_int(), 0);
    case K::Float:
      return float_distance(e.as_float(), 0.0);
    default:
      return 0;
  }
}

void accumulate(const Value& v, const Constraint& c, ShrinkMeasure& m);

void accumulate_items(const std::vector<Value>& items, const Constraint& elem, ShrinkMeasure& m) {
  for (const auto& item : items) accumulate(item, elem, m);
}

void accumulate(const Value& v, const Constraint& c, ShrinkMeasure& m) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          m.elements += element_count(v);
          m.choice += matching_item(v, n).value_or(n.items.size());
        } else if constexpr (std::is_same_v<T, Bools>) {
          m.elements += 1;
          if (v.kind() == K::Bool && v.as_bool()) m.distance += 1;
        } else if constexpr (std::is_same_v<T, Ints>) {
          m.elements += 1;
          if (v.kind() == K::Int) m.distance += int_distance(v.as_int(), int_shrink_target(n));
        } else if constexpr (std::is_same_v<T, Floats>) {
          m.elements += 1;
          if (v.kind() == K::Float) m.distance += float_distance(v.as_float(), float_target(n));
        } else if constexpr (std::is_same_v<T, Lists>) {
          if (v.kind() == K::List) {
            accumulate_items(v.as_list().items, *n.elem, m);
          } else {
            m.elements += element_count(v);
          }
        } else if constexpr (std::is_same_v<T, IntLists>) {
          if (v.kind() != K::List) {
            m.elements += element_count(v);
            return;
          }
          for (const auto& item : v.as_list().items) {
            m.elements += 1;
            if (item.kind() == K::Int) m.distance += int_distance(item.as_int(), n.min);
          }
        } else if constexpr (std::is_same_v<T, Tuples>) {
          if (v.kind() != K::Tuple || v.as_tuple().items.size() != n.components.size()) {
            m.elements += element_count(v);
            return;
          }
          for (std::size_t i = 0; i < n.components.size(); ++i) {
            accumulate(v.as_tuple().items[i], n.components[i], m);
          }
        } else if constexpr (std::is_same_v<T, NpShapes>) {
          if (v.kind() != K::Tuple) {
            m.elements += element_count(v);
            return;
          }
          for (const auto& side : v.as_tuple().items) {
            m.elements += 1;
            if (side.kind() == K::Int) {
              m.distance += int_distance(side.as_int(), static_cast<std::int64_t>(n.min_side));
            }
          }
        } else if constexpr (std::is_same_v<T, NpArrays>) {
          if (v.kind() != K::NdArray) {
            m.elements += element_count(v);
            return;
          }
          const auto& nd = v.as_ndarray();
          m.elements += nd.data.size();
          if (const auto* shapes = std::get_if<NpShapes>(&n.shape)) {
            m.elements += nd.shape.size();
            for (auto side : nd.shape) m.distance += static_cast<long double>(side - std::min(side, shapes->min_side));
          }
          for (const auto& e : nd.data) m.distance += element_distance(e);
        } else if constexpr (std::is_same_v<T, Dicts>) {
          if (v.kind() != K::Dict) {
            m.elements += element_count(v);
            return;
          }
          for (const auto& [key, val] : v.as_dict().entries) {
            accumulate(key, *n.keys, m);
            accumulate(val, *n.values, m);
          }
        } else if constexpr (std::is_same_v<T, Anys>) {
          const auto idx = matching_alternative(v, n);
          if (!idx) {
            m.elements += element_count(v);
            m.choice += n.alternatives.size();
            return;
          }
          accumulate(v, n.alternatives[*idx], m);
          m.choice += *idx;
        } else {
          m.elements += 1;
        }
      },
      c.node);
}

// Smallest member of a constraint, when it is obvious without a search.
std::optional<Value> minimal_value(const Constraint& c) {
  return std::visit(
      [](const auto& n) -> std::optional<Value> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          for (const auto& item : n.items) {
            if (const auto* v = std::get_if<Value>(&item)) return *v;
          }
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Bools>) {
          return Value::boolean(false);
        } else if constexpr (std::is_same_v<T, Ints>) {
          return Value::integer(int_shrink_target(n));
        } else if constexpr (std::is_same_v<T, Floats>) {
          if (!float_window(n, DBL_MAX)) return std::nullopt;
          return Value::real(float_target(n));
        } else if constexpr (std::is_same_v<T, Lists>) {
          if (n.min_len != 0) return std::nullopt;
          return Value::list({});
        } else if constexpr (std::is_same_v<T, IntLists>) {
          return Value::list(std::vector<Value>(n.min_len, Value::integer(n.min)));
        } else if constexpr (std::is_same_v<T, Tuples>) {
          std::vector<Value> items;
          for (const auto& comp : n.components) {
            auto v = minimal_value(comp);
            if (!v) return std::nullopt;
            items.push_back(std::move(*v));
          }
          return Value::tuple(std::move(items));
        } else if constexpr (std::is_same_v<T, NpShapes>) {
          return Value::tuple(std::vector<Value>(
              n.min_dims, Value::integer(static_cast<std::int64_t>(n.min_side))));
        } else {
          return std::nullopt;
        }
      },
      c.node);
}

// Row-major sub-block of `nd` with every side cut down to `shape`.
NdArrayValue sub_block(const NdArrayValue& nd, const std::vector<std::size_t>& shape) {
  NdArrayValue out{nd.dtype, shape, {}};
  std::size_t total = 1;
  for (auto side : shape) total *= side;
  out.data.reserve(total);
  std::vector<std::size_t> index(shape.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) flat = flat * nd.shape[d] + index[d];
    out.data.push_back(nd.data[flat]);
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++index[d] < shape[d]) break;
      index[d] = 0;
    }
  }
  return out;
}

Value wrap_nd(NdArrayValue nd) {
  return Value::ndarray(nd.dtype, std::move(nd.shape), std::move(nd.data));
}

class Shrinker {
 public:
  Shrinker(const Value& v0, const Constraint& root, const StillFails& f, std::size_t budget,
           ShrinkStats* stats)
      : root_(root), f_(f), budget_(budget), stats_(stats), current_(v0),
        current_measure_(shrink_measure(v0, root)) {}

  Value run() {
    const Pred top = [this](const Value& whole) { return probe(whole); };
    while (!exhausted()) {
      const Value before = current_;
      node(current_, root_, top);
      if (structural_eq(before, current_)) break;
    }
    return current_;
  }

 private:
  bool exhausted() const { return used_ >= budget_; }

  // Every candidate funnels through here: it must satisfy the root
  // constraint and lower the measure before still_fails is consulted.
  bool probe(const Value& whole) {
    if (exhausted()) return false;
    const ShrinkMeasure m = shrink_measure(whole, root_);
    if (!(m < current_measure_)) return false;
    if (!satisfies(whole, root_)) return false;
    ++used_;
    if (stats_) ++stats_->evaluations;
    if (!f_(whole)) return false;
    current_ = whole;
    current_measure_ = m;
    if (stats_) stats_->accepted.push_back({whole, rationale_});
    return true;
  }

  bool attempt(const Value& candidate, const Pred& pred, ShrinkRationale r) {
    if (exhausted()) return false;
    rationale_ = r;
    return pred(candidate);
  }

  // Binary search from x toward target; result is the smallest failing probe.
  std::int64_t search_int(std::int64_t x, std::int64_t target,
                          const std::function<Value(std::int64_t)>& make, const Pred& pred,
                          ShrinkRationale r) {
    if (x == target) return x;
    if (attempt(make(target), pred, r)) return target;
    std::int64_t good = x;
    std::int64_t bad = target;
    while (!exhausted()) {
      const __int128 diff = static_cast<__int128>(good) - bad;
      if (diff <= 1 && diff >= -1) break;
      const auto mid = static_cast<std::int64_t>(bad + diff / 2);
      if (attempt(make(mid), pred, r)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return good;
  }

  double search_float(double x, double target, bool width32,
                      const std::function<Value(double)>& make, const Pred& pred) {
    if (structural_eq(Value::real(x), Value::real(target))) return x;
    if (attempt(make(target), pred, ShrinkRationale::HalveTowardBound)) return target;
    if (!std::isfinite(x)) return x;
    double good = x;
    double bad = target;
    for (int i = 0; i < kFloatBisections && !exhausted(); ++i) {
      double mid = bad / 2 + good / 2;
      if (width32) mid = static_cast<float>(mid);
      if (mid == good || mid == bad) break;
      if (attempt(make(mid), pred, ShrinkRationale::HalveTowardBound)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return good;
  }

  template <class Item, class Wrap>
  void remove_chunks(std::vector<Item>& items, std::size_t min_len, const Wrap& wrap,
                     const Pred& pred) {
    for (std::size_t k = items.size(); k >= 1 && !exhausted(); k /= 2) {
      std::size_t i = 0;
      while (i + k <= items.size() && items.size() - k >= min_len && !exhausted()) {
        std::vector<Item> candidate = items;
        candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i),
                        candidate.begin() + static_cast<std::ptrdiff_t>(i + k));
        if (attempt(wrap(candidate), pred, ShrinkRationale::RemoveChunk)) {
          items = std::move(candidate);
        } else {
          i += k;
        }
      }
      if (k == 1) break;
    }
  }

  // Shrinks each position of a sequence in place against its own constraint.
  template <class Wrap, class ConstraintAt>
  void shrink_each(std::vector<Value>& items, const Wrap& wrap, const ConstraintAt& at,
                   const Pred& pred) {
    for (std::size_t i = 0; i < items.size() && !exhausted(); ++i) {
      const Pred sub = [&, i](const Value& x) {
        std::vector<Value> t = items;
        t[i] = x;
        return pred(wrap(std::move(t)));
      };
      items[i] = node(items[i], at(i), sub);
    }
  }

  Value node(const Value& v, const Constraint& c, const Pred& pred) {
    return std::visit([&](const auto& n) { return visit(v, n, pred); }, c.node);
  }

  Value visit(const Value& v, const Froms& n, const Pred& pred) {
    const std::size_t idx = matching_item(v, n).value_or(n.items.size());
    for (std::size_t i = 0; i < idx && i < n.items.size(); ++i) {
      const auto* literal = std::get_if<Value>(&n.items[i]);
      if (literal && attempt(*literal, pred, ShrinkRationale::ComponentShrink)) return *literal;
    }
    return v;
  }

  Value visit(const Value& v, const Bools&, const Pred& pred) {
    if (v.kind() == K::Bool && v.as_bool() &&
        attempt(Value::boolean(false), pred, ShrinkRationale::HalveTowardBound)) {
      return Value::boolean(false);
    }
    return v;
  }

  Value visit(const Value& v, const Ints& n, const Pred& pred) {
    if (v.kind() != K::Int) return v;
    return Value::integer(search_int(
        v.as_int(), int_shrink_target(n), [](std::int64_t x) { return Value::integer(x); }, pred,
        ShrinkRationale::HalveTowardBound));
  }

  Value visit(const Value& v, const Floats& n, const Pred& pred) {
    if (v.kind() != K::Float) return v;
    return Value::real(search_float(v.as_float(), float_target(n), n.width == 32,
                                    [](double d) { return Value::real(d); }, pred));
  }

  Value visit(const Value& v, const Lists& n, const Pred& pred) {
    if (v.kind() != K::List) return v;
    std::vector<Value> items = v.as_list().items;
    auto wrap = [](std::vector<Value> xs) { return Value::list(std::move(xs)); };
    remove_chunks(items, n.min_len, wrap, pred);
    shrink_each(items, wrap, [&](std::size_t) -> const Constraint& { return *n.elem; }, pred);
    return wrap(items);
  }

  Value visit(const Value& v, const IntLists& n, const Pred& pred) {
    if (v.kind() != K::List) return v;
    std::vector<Value> items = v.as_list().items;
    auto wrap = [](std::vector<Value> xs) { return Value::list(std::move(xs)); };
    remove_chunks(items, n.min_len, wrap, pred);
    const Constraint elem = Ints{n.min, n.effective_max()};
    shrink_each(items, wrap, [&](std::size_t) -> const Constraint& { return elem; }, pred);
    return wrap(items);
  }

  Value visit(const Value& v, const Tuples& n, const Pred& pred) {
    if (v.kind() != K::Tuple || v.as_tuple().items.size() != n.components.size()) return v;
    std::vector<Value> items = v.as_tuple().items;
    auto wrap = [](std::vector<Value> xs) { return Value::tuple(std::move(xs)); };
    shrink_each(items, wrap, [&](std::size_t i) -> const Constraint& { return n.components[i]; },
                pred);
    return wrap(items);
  }

  Value visit(const Value& v, const NpShapes& n, const Pred& pred) {
    if (v.kind() != K::Tuple) return v;
    std::vector<Value> items = v.as_tuple().items;
    auto wrap = [](std::vector<Value> xs) { return Value::tuple(std::move(xs)); };
    for (std::size_t d = 0; d < items.size() && items.size() > n.min_dims && !exhausted();) {
      std::vector<Value> candidate = items;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(d));
      if (attempt(wrap(candidate), pred, ShrinkRationale::SideShrink)) {
        items = std::move(candidate);
      } else {
        ++d;
      }
    }
    const Constraint side = Ints{static_cast<std::int64_t>(n.min_side),
                                 static_cast<std::int64_t>(n.max_side)};
    for (std::size_t i = 0; i < items.size() && !exhausted(); ++i) {
      if (items[i].kind() != K::Int) continue;
      items[i] = Value::integer(search_int(
          items[i].as_int(), static_cast<std::int64_t>(n.min_side),
          [&, i](std::int64_t x) {
            std::vector<Value> t = items;
            t[i] = Value::integer(x);
            return wrap(std::move(t));
          },
          pred, ShrinkRationale::SideShrink));
    }
    return wrap(items);
  }

  Value visit(const Value& v, const NpArrays& n, const Pred& pred) {
    if (v.kind() != K::NdArray) return v;
    NdArrayValue nd = v.as_ndarray();
    if (const auto* shapes = std::get_if<NpShapes>(&n.shape)) {
      for (std::size_t d = 0; d < nd.shape.size() && nd.shape.size() > shapes->min_dims &&
                              !exhausted();) {
        std::vector<std::size_t> cut = nd.shape;
        cut[d] = 1;
        NdArrayValue candidate = sub_block(nd, cut);
        candidate.shape.erase(candidate.shape.begin() + static_cast<std::ptrdiff_t>(d));
        if (attempt(wrap_nd(candidate), pred, ShrinkRationale::SideShrink)) {
          nd = std::move(candidate);
        } else {
          ++d;
        }
      }
      for (std::size_t d = 0; d < nd.shape.size() && !exhausted(); ++d) {
        const auto side = search_int(
            static_cast<std::int64_t>(nd.shape[d]), static_cast<std::int64_t>(shapes->min_side),
            [&, d](std::int64_t x) {
              std::vector<std::size_t> cut = nd.shape;
              cut[d] = static_cast<std::size_t>(x);
              return wrap_nd(sub_block(nd, cut));
            },
            pred, ShrinkRationale::SideShrink);
        if (static_cast<std::size_t>(side) != nd.shape[d]) {
          std::vector<std::size_t> cut = nd.shape;
          cut[d] = static_cast<std::size_t>(side);
          nd = sub_block(nd, cut);
        }
      }
    }
    for (std::size_t i = 0; i < nd.data.size() && !exhausted(); ++i) {
      auto with = [&, i](Value e) {
        NdArrayValue t = nd;
        t.data[i] = std::move(e);
        return wrap_nd(std::move(t));
      };
      const Value& e = nd.data[i];
      if (e.kind() == K::Bool) {
        if (e.as_bool() && attempt(with(Value::boolean(false)), pred, ShrinkRationale::ElementZero)) {
          nd.data[i] = Value::boolean(false);
        }
      } else if (e.kind() == K::Int) {
        nd.data[i] = Value::integer(search_int(
            e.as_int(), 0, [&](std::int64_t x) { return with(Value::integer(x)); }, pred,
            ShrinkRationale::ElementZero));
      } else if (e.kind() == K::Float) {
        nd.data[i] = Value::real(search_float(e.as_float(), 0.0, n.dtype == DType::Float32,
                                              [&](double d) { return with(Value::real(d)); },
                                              pred));
      }
    }
    return wrap_nd(std::move(nd));
  }

  Value visit(const Value& v, const Dicts& n, const Pred& pred) {
    if (v.kind() != K::Dict) return v;
    auto entries = v.as_dict().entries;
    auto wrap = [](std::vector<std::pair<Value, Value>> xs) { return Value::dict(std::move(xs)); };
    remove_chunks(entries, n.min_size, wrap, pred);
    for (std::size_t i = 0; i < entries.size() && !exhausted(); ++i) {
      const Pred on_value = [&, i](const Value& x) {
        auto t = entries;
        t[i].second = x;
        return pred(wrap(std::move(t)));
      };
      entries[i].second = node(entries[i].second, *n.values, on_value);
      const Pred on_key = [&, i](const Value& x) {
        auto t = entries;
        t[i].first = x;
        return pred(wrap(std::move(t)));
      };
      entries[i].first = node(entries[i].first, *n.keys, on_key);
    }
    return wrap(entries);
  }

  Value visit(const Value& v, const Anys& n, const Pred& pred) {
    const auto idx = matching_alternative(v, n);
    if (!idx) return v;
    for (std::size_t i = 0; i < *idx; ++i) {
      auto simplest = minimal_value(n.alternatives[i]);
      if (simplest && attempt(*simplest, pred, ShrinkRationale::ComponentShrink)) return *simplest;
    }
    return node(v, n.alternatives[*idx], pred);
  }

  Value visit(const Value& v, const Objs&, const Pred&) { return v; }

  const Constraint& root_;
  const StillFails& f_;
  std::size_t budget_;
  ShrinkStats* stats_;
  std::size_t used_ = 0;
  ShrinkRationale rationale_ = ShrinkRationale::HalveTowardBound;
  Value current_;
  ShrinkMeasure current_measure_;
};

}  // namespace

std::string_view rationale_name(ShrinkRationale r) {
  switch (r) {
    case ShrinkRationale::RemoveChunk:
      return "remove-chunk";
    case ShrinkRationale::HalveTowardBound:
      return "halve-toward-bound";
    case ShrinkRationale::ComponentShrink:
      return "component-shrink";
    case ShrinkRationale::SideShrink:
      return "side-shrink";
    case ShrinkRationale::ElementZero:
      return "element-zero";
  }
  return "unknown";
}

std::int64_t int_shrink_target(const Ints& c) {
  if (c.min) return *c.min;
  if (c.max && *c.max < 0) return *c.max;
  return 0;
}

ShrinkMeasure shrink_measure(const Value& v, const Constraint& c) {
  ShrinkMeasure m;
  accumulate(v, c, m);
  return m;
}

Value shrink(const Value& v0, const Constraint& c, const StillFails& still_fails,
             std::size_t budget, ShrinkStats* stats) {
  return Shrinker(v0, c, still_fails, budget, stats).run();
}

}  // namespace ancheck
