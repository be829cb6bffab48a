#include "ancheck/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ancheck/eval.hpp"

namespace ancheck {

namespace {

constexpr int kGeneratorRequireAttempts = 100;
constexpr int kDictKeyRetries = 5;

std::int64_t saturating_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    return b > 0 ? std::numeric_limits<std::int64_t>::max()
                 : std::numeric_limits<std::int64_t>::min();
  }
  return r;
}

void charge(GenContext& ctx, std::uint64_t leaves) {
  ctx.budget_used += leaves;
  if (ctx.budget_used > ctx.config.size_budget) throw BudgetExhausted();
}

std::int64_t draw_int(GenContext& ctx, std::int64_t lo, std::int64_t hi) {
  if (ctx.rng.chance(ctx.config.boundary_bias)) {
    const auto points = boundary_points(lo, hi);
    return points[ctx.rng.below(points.size())];
  }
  return ctx.rng.uniform_int(lo, hi);
}

std::size_t draw_size(GenContext& ctx, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(
      ctx.rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

double draw_float(const Floats& f, GenContext& ctx) {
  const GenConfig& cfg = ctx.config;
  if (f.allow_nan && ctx.rng.chance(cfg.special_float_chance)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (f.allow_inf && ctx.rng.chance(cfg.special_float_chance)) {
    std::vector<double> inf;
    if (!f.min) inf.push_back(-std::numeric_limits<double>::infinity());
    if (!f.max) inf.push_back(std::numeric_limits<double>::infinity());
    if (!inf.empty()) return inf[ctx.rng.below(inf.size())];
  }
  const auto window = float_window(f, cfg.float_window);
  if (!window) throw GenerationFailed("empty float range");
  const double lo = window->lo;
  const double hi = window->hi;
  if (ctx.rng.chance(cfg.boundary_bias)) {
    std::vector<double> points{lo, hi};
    if (lo < 0 && hi > 0) points.push_back(0.0);
    return points[ctx.rng.below(points.size())];
  }
  const double u = ctx.rng.next_double();
  double d = lo * (1 - u) + hi * u;
  if (f.width == 32) d = static_cast<float>(d);
  return std::clamp(d, lo, hi);
}

struct ElementWindow {
  std::int64_t lo;
  std::int64_t hi;
};

ElementWindow element_window(DType t, const GenConfig& cfg) {
  const auto [lo, hi] = dtype_int_range(t);
  if (dtype_is_unsigned(t)) return {0, std::min(hi, cfg.unsigned_elem_max)};
  return {std::max(lo, cfg.signed_elem_min), std::min(hi, cfg.signed_elem_max)};
}

Value draw_element(DType t, GenContext& ctx) {
  const GenConfig& cfg = ctx.config;
  if (t == DType::Bool) return Value::boolean(ctx.rng.chance(0.5));
  if (dtype_is_float(t)) {
    const double lo = cfg.float_elem_min;
    const double hi = cfg.float_elem_max;
    double d = 0;
    if (ctx.rng.chance(cfg.boundary_bias)) {
      const double points[] = {lo, hi, std::clamp(0.0, lo, hi)};
      d = points[ctx.rng.below(3)];
    } else {
      const double u = ctx.rng.next_double();
      d = lo * (1 - u) + hi * u;
    }
    if (t == DType::Float32) d = static_cast<float>(d);
    return Value::real(d);
  }
  const auto w = element_window(t, cfg);
  return Value::integer(draw_int(ctx, w.lo, w.hi));
}

std::vector<std::size_t> draw_shape(const NpShapes& s, GenContext& ctx) {
  const std::size_t dims = draw_size(ctx, s.min_dims, s.max_dims);
  std::vector<std::size_t> shape;
  for (std::size_t i = 0; i < dims; ++i) {
    shape.push_back(static_cast<std::size_t>(draw_int(ctx, static_cast<std::int64_t>(s.min_side),
                                                      static_cast<std::int64_t>(s.max_side))));
  }
  return shape;
}

bool all_true(const std::vector<RequireExpr>& requires_, const Binding& b) {
  for (const auto& r : requires_) {
    const EvalResult res = eval(r, b);
    const bool* ok = std::get_if<bool>(&res);
    if (!ok || !*ok) return false;
  }
  return true;
}

}  // namespace

std::vector<std::int64_t> boundary_points(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> out{lo, hi};
  if (lo < hi) {
    out.push_back(lo + 1);
    out.push_back(hi - 1);
  }
  if (lo <= 0 && 0 <= hi) out.push_back(0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::pair<std::int64_t, std::int64_t> int_draw_range(const Ints& c, std::int64_t window) {
  std::int64_t lo = c.min.value_or(-window);
  std::int64_t hi = c.max.value_or(window);
  // A one-sided bound outside the window gets a window-sized span of its own.
  if (c.min && !c.max && *c.min > window) hi = saturating_add(*c.min, 2 * window);
  if (c.max && !c.min && *c.max < -window) lo = saturating_add(*c.max, -2 * window);
  return {lo, hi};
}

Binding draft_values(const DraftBinding& b) {
  Binding out;
  out.reserve(b.size());
  for (const auto& [name, d] : b) out.emplace_back(name, d.value);
  return out;
}

Draft Generator::generate(const Constraint& c, GenContext& ctx) const {
  ctx.budget_used = 0;
  Draft out;
  out.value = draw(c, ctx, out.constructs, 0);
  return out;
}

DraftBinding Generator::generate_args(const FunctionAnnotations& fa, GenContext& ctx) const {
  ctx.budget_used = 0;
  return draw_args(fa, ctx, 0);
}

NeedsConstruct Generator::gen_call(const GenCall& call) const {
  NeedsConstruct out{call.name, {}, {}};
  for (const auto& arg : call.args) out.positional.push_back(Draft{arg, {}});
  return out;
}

DraftBinding Generator::draw_args(const FunctionAnnotations& fa, GenContext& ctx,
                                  unsigned depth) const {
  DraftBinding out;
  for (const auto& [name, c] : fa.args) {
    Draft d;
    d.value = draw(c, ctx, d.constructs, depth);
    out.emplace_back(name, std::move(d));
  }
  return out;
}

NeedsConstruct Generator::draw_objs(const std::string& gen, GenContext& ctx,
                                    unsigned depth) const {
  if (depth >= ctx.config.max_depth) throw GenerationFailed("generator nesting too deep");
  const FunctionAnnotations* fa = spec_ ? spec_->generator(gen) : nullptr;
  if (!fa) throw GenerationFailed("no annotations for generator '" + gen + "'");
  for (int attempt = 0; attempt < kGeneratorRequireAttempts; ++attempt) {
    DraftBinding args = draw_args(*fa, ctx, depth + 1);
    if (all_true(fa->preconditions, draft_values(args))) {
      return NeedsConstruct{gen, {}, std::move(args)};
    }
  }
  throw GenerationFailed("preconditions of generator '" + gen + "' rejected every candidate");
}

Value Generator::draw(const Constraint& c, GenContext& ctx, std::vector<NeedsConstruct>& sink,
                      unsigned depth) const {
  auto placeholder = [&](NeedsConstruct nc) {
    const std::string gen = nc.gen;
    sink.push_back(std::move(nc));
    return Value::handle(sink.size() - 1, gen);
  };

  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Froms>) {
          charge(ctx, 1);
          const auto& item = n.items[ctx.rng.below(n.items.size())];
          if (const auto* call = std::get_if<GenCall>(&item)) return placeholder(gen_call(*call));
          return std::get<Value>(item);
        } else if constexpr (std::is_same_v<T, Bools>) {
          charge(ctx, 1);
          return Value::boolean(ctx.rng.chance(0.5));
        } else if constexpr (std::is_same_v<T, Ints>) {
          charge(ctx, 1);
          const auto [lo, hi] = int_draw_range(n, ctx.config.int_window);
          return Value::integer(draw_int(ctx, lo, hi));
        } else if constexpr (std::is_same_v<T, Floats>) {
          charge(ctx, 1);
          return Value::real(draw_float(n, ctx));
        } else if constexpr (std::is_same_v<T, Lists>) {
          const std::size_t len = draw_size(ctx, n.min_len, n.max_len);
          std::vector<Value> items;
          for (std::size_t i = 0; i < len; ++i) items.push_back(draw(*n.elem, ctx, sink, depth));
          return Value::list(std::move(items));
        } else if constexpr (std::is_same_v<T, IntLists>) {
          const std::size_t len = draw_size(ctx, n.min_len, n.effective_max_len());
          charge(ctx, len);
          std::vector<Value> items;
          for (std::size_t i = 0; i < len; ++i) {
            items.push_back(Value::integer(draw_int(ctx, n.min, n.effective_max())));
          }
          return Value::list(std::move(items));
        } else if constexpr (std::is_same_v<T, Tuples>) {
          std::vector<Value> items;
          for (const auto& comp : n.components) items.push_back(draw(comp, ctx, sink, depth));
          return Value::tuple(std::move(items));
        } else if constexpr (std::is_same_v<T, NpShapes>) {
          const auto shape = draw_shape(n, ctx);
          charge(ctx, shape.size());
          std::vector<Value> items;
          for (auto side : shape) items.push_back(Value::integer(static_cast<std::int64_t>(side)));
          return Value::tuple(std::move(items));
        } else if constexpr (std::is_same_v<T, NpArrays>) {
          std::vector<std::size_t> shape;
          if (const auto* literal = std::get_if<std::vector<std::size_t>>(&n.shape)) {
            shape = *literal;
          } else {
            shape = draw_shape(std::get<NpShapes>(n.shape), ctx);
          }
          std::uint64_t count = 1;
          for (auto side : shape) {
            if (__builtin_mul_overflow(count, static_cast<std::uint64_t>(side), &count)) {
              throw BudgetExhausted();
            }
          }
          charge(ctx, count);
          std::vector<Value> data;
          data.reserve(count);
          for (std::uint64_t i = 0; i < count; ++i) data.push_back(draw_element(n.dtype, ctx));
          return Value::ndarray(n.dtype, std::move(shape), std::move(data));
        } else if constexpr (std::is_same_v<T, Dicts>) {
          const std::size_t size = draw_size(ctx, n.min_size, n.max_size);
          std::vector<std::pair<Value, Value>> entries;
          for (std::size_t i = 0; i < size; ++i) {
            bool placed = false;
            for (int retry = 0; retry < kDictKeyRetries && !placed; ++retry) {
              Value key = draw(*n.keys, ctx, sink, depth);
              const bool dup = std::any_of(entries.begin(), entries.end(), [&](const auto& e) {
                return structural_eq(e.first, key);
              });
              if (!dup) {
                entries.emplace_back(std::move(key), Value());
                placed = true;
              }
            }
          }
          if (entries.size() < n.min_size) {
            throw GenerationFailed("could not draw enough distinct dict keys");
          }
          for (auto& entry : entries) entry.second = draw(*n.values, ctx, sink, depth);
          return Value::dict(std::move(entries));
        } else if constexpr (std::is_same_v<T, Anys>) {
          const auto& alt = n.alternatives[ctx.rng.below(n.alternatives.size())];
          return draw(alt, ctx, sink, depth);
        } else {
          charge(ctx, 1);
          return placeholder(draw_objs(n.gen, ctx, depth));
        }
      },
      c.node);
}

}  // namespace ancheck
