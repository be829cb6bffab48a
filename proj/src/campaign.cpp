#include "ancheck/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ancheck/eval.hpp"
#include "ancheck/generate.hpp"
#include "ancheck/shrink.hpp"

namespace ancheck {

FilterTooMuch::FilterTooMuch(std::size_t attempts, std::size_t rejected,
                             std::vector<CaseOutcome> outcomes)
    : std::runtime_error("preconditions rejected " + std::to_string(rejected) + " of " +
                         std::to_string(attempts) + " generated cases"),
      attempts_(attempts),
      rejected_(rejected),
      outcomes_(std::move(outcomes)) {}

std::vector<std::string> CampaignConfig::problems() const {
  std::vector<std::string> out;
  if (max_examples == 0) out.emplace_back("max_examples must be at least 1");
  if (!(max_rejection_ratio > 0 && max_rejection_ratio < 1)) {
    out.emplace_back("max_rejection_ratio must lie in (0, 1)");
  }
  if (max_consecutive_rejections == 0) {
    out.emplace_back("max_consecutive_rejections must be at least 1");
  }
  if (!(default_timeout_s > 0) || !std::isfinite(default_timeout_s)) {
    out.emplace_back("default timeout must be a positive number of seconds");
  }
  if (!(gen.boundary_bias >= 0 && gen.boundary_bias <= 1)) {
    out.emplace_back("boundary_bias must lie in [0, 1]");
  }
  return out;
}

std::string_view case_status_name(CaseStatus s) {
  switch (s) {
    case CaseStatus::Pass: return "pass";
    case CaseStatus::Crash: return "crash";
    case CaseStatus::Timeout: return "timeout";
    case CaseStatus::Rejected: return "rejected";
    case CaseStatus::EvalErrorRejected: return "eval_error_rejected";
    case CaseStatus::ConstructCrash: return "construct_crash";
  }
  return "?";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Ok: return "ok";
    case Verdict::FilterTooMuch: return "filter_too_much";
    case Verdict::Invalid: return "invalid";
    case Verdict::ConstructorFailed: return "constructor_failed";
    case Verdict::Skipped: return "skipped";
  }
  return "?";
}

std::uint64_t block_seed(std::uint64_t campaign_seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(campaign_seed ^ mix64(h));
}

namespace {

std::size_t binding_elements(const Binding& b) {
  std::size_t n = 0;
  for (const auto& [_, v] : b) n += element_count(v);
  return n;
}

}  // namespace

std::map<CrashSignature, DedupEntry> dedup(const std::vector<CaseOutcome>& outcomes) {
  std::map<CrashSignature, DedupEntry> out;
  for (const auto& o : outcomes) {
    if (o.status != CaseStatus::Crash && o.status != CaseStatus::ConstructCrash) continue;
    if (!o.signature) continue;
    DedupEntry& e = out[*o.signature];
    const bool better =
        e.count == 0 ||
        std::pair(binding_elements(o.binding), o.case_index) <
            std::pair(binding_elements(e.representative.binding), e.representative.case_index);
    ++e.count;
    if (better) e.representative = o;
  }
  return out;
}

namespace {

std::uint64_t to_ms(double seconds) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(seconds * 1000)));
}

Value kwargs_of(const Binding& b) {
  std::vector<std::pair<Value, Value>> entries;
  entries.reserve(b.size());
  for (const auto& [name, v] : b) entries.emplace_back(Value::str(name), v);
  return Value::dict(std::move(entries));
}

CrashSignature signature_of(const Response& r) {
  return {r.exc_type.value_or(""), r.location.value_or("")};
}

void record_failure(const Response& r, CaseOutcome& o) {
  o.signature = signature_of(r);
  o.message = r.message.value_or("");
  o.frames = r.frames.value_or(std::vector<std::string>{});
}

// Request target for a construct of the named block.
std::string construct_target(const std::string& block) {
  if (auto mn = split_method_name(block); mn && mn->method == "__init__") return mn->class_name;
  return block;
}

Value substitute(const Value& v, const std::vector<Value>& handles) {
  switch (v.kind()) {
    case Value::Kind::Handle:
      return handles.at(v.as_handle().id);
    case Value::Kind::List:
    case Value::Kind::Tuple: {
      std::vector<Value> items;
      for (const auto& item : v.sequence_items()) items.push_back(substitute(item, handles));
      return v.kind() == Value::Kind::List ? Value::list(std::move(items))
                                           : Value::tuple(std::move(items));
    }
    case Value::Kind::Dict: {
      std::vector<std::pair<Value, Value>> entries;
      for (const auto& [k, val] : v.as_dict().entries) {
        entries.emplace_back(substitute(k, handles), substitute(val, handles));
      }
      return Value::dict(std::move(entries));
    }
    default:
      return v;
  }
}

bool requires_hold(const FunctionAnnotations& fa, const Binding& b) {
  for (const auto& r : fa.preconditions) {
    const EvalResult res = eval(r, b);
    const bool* ok = std::get_if<bool>(&res);
    if (!ok || !*ok) return false;
  }
  return true;
}

struct Target {
  Op op = Op::Call;
  std::string wire;
  std::string block;
  const FunctionAnnotations* fa = nullptr;
  // Per-case receiver construction for methods without a constructor example.
  const FunctionAnnotations* ctor = nullptr;
  std::string class_name;
  std::optional<Value> receiver;
  std::uint64_t timeout_ms = 0;
};

class Runner {
 public:
  Runner(const AnnotationSpec& spec, const CampaignConfig& cfg, Session& worker)
      : spec_(spec), cfg_(cfg), worker_(worker), gen_(&spec) {}

  std::uint64_t timeout_for(const FunctionAnnotations& fa) const {
    return to_ms(fa.timeout_s.value_or(cfg_.default_timeout_s));
  }

  void reset() {
    built_.clear();
    Request r;
    r.op = Op::Reset;
    if (worker_.call(r).status != Status::Ok) throw ProtocolError("worker rejected reset");
  }

  std::vector<CaseOutcome> run_cases(const Target& t);
  Value build_instance(const std::string& class_name, const FunctionAnnotations& ctor,
                       std::uint64_t timeout_ms);
  void shrink_into(const std::vector<CaseOutcome>& outcomes, const Target& t,
                   std::vector<UniqueCrash>& sink);

 private:
  // A construct that did not produce a handle, already classified.
  using Resolved = std::variant<Value, CaseOutcome>;
  using ResolvedBinding = std::variant<Binding, CaseOutcome>;

  Response send(Op op, const std::string& target, std::vector<Value> args,
                std::optional<Value> kwargs, std::uint64_t timeout_ms) {
    Request r;
    r.op = op;
    r.target = target;
    r.args = std::move(args);
    r.kwargs = std::move(kwargs);
    r.timeout_ms = timeout_ms;
    return worker_.call(std::move(r));
  }

  Response dispatch(const Target& t, const Binding& b, const std::optional<Value>& receiver) {
    std::vector<Value> args;
    if (receiver) args.push_back(*receiver);
    return send(t.op, t.wire, std::move(args), kwargs_of(b), t.timeout_ms);
  }

  Value handle_from(const Response& r, const std::string& target, const std::string& gen,
                    Binding args) {
    if (!r.value || r.value->kind() != Value::Kind::Handle) {
      throw ProtocolError("construct of '" + target + "' did not return a handle");
    }
    Value h = Value::handle(r.value->as_handle().id, gen);
    built_[h.as_handle().id] = {h, std::move(args)};
    return h;
  }

  void collect_objects(const Value& v, std::vector<std::pair<Value, Binding>>& out) const {
    switch (v.kind()) {
      case Value::Kind::Handle: {
        auto it = built_.find(v.as_handle().id);
        if (it == built_.end()) return;
        for (const auto& existing : out) {
          if (structural_eq(existing.first, v)) return;
        }
        for (const auto& [_, arg] : it->second.second) collect_objects(arg, out);
        out.push_back(it->second);
        return;
      }
      case Value::Kind::List:
      case Value::Kind::Tuple:
        for (const auto& item : v.sequence_items()) collect_objects(item, out);
        return;
      case Value::Kind::Dict:
        for (const auto& [k, val] : v.as_dict().entries) {
          collect_objects(k, out);
          collect_objects(val, out);
        }
        return;
      default:
        return;
    }
  }

  // Classifies a failed construct; nullopt when it succeeded.
  std::optional<CaseOutcome> construct_failure(const Response& r, const std::string& target,
                                               const std::string& block, Binding binding,
                                               std::size_t case_index) {
    if (r.status == Status::Ok) return std::nullopt;
    if (r.status == Status::Invalid) throw InvalidTarget(target, r.message.value_or(""));
    CaseOutcome o;
    o.case_index = case_index;
    o.attributed_to = block;
    o.binding = std::move(binding);
    if (r.status == Status::Crash) {
      o.status = CaseStatus::ConstructCrash;
      record_failure(r, o);
    } else {
      o.status = CaseStatus::Timeout;
      o.message = r.message.value_or("");
    }
    return o;
  }

  Resolved construct(const NeedsConstruct& nc, std::uint64_t timeout_ms, std::size_t case_index) {
    const std::string target = construct_target(nc.gen);
    std::vector<Value> positional;
    Binding shown;
    for (std::size_t i = 0; i < nc.positional.size(); ++i) {
      Resolved r = resolve(nc.positional[i], timeout_ms, case_index);
      if (auto* fail = std::get_if<CaseOutcome>(&r)) return std::move(*fail);
      shown.emplace_back(std::to_string(i), std::get<Value>(r));
      positional.push_back(std::get<Value>(std::move(r)));
    }
    std::optional<Value> kwargs;
    if (nc.positional.empty()) {
      DraftBinding named;
      for (const auto& [name, d] : nc.named) named.emplace_back(name, d);
      ResolvedBinding rb = resolve_binding(named, timeout_ms, case_index);
      if (auto* fail = std::get_if<CaseOutcome>(&rb)) return std::move(*fail);
      shown = std::get<Binding>(std::move(rb));
      kwargs = kwargs_of(shown);
    }
    const Response r = send(Op::Construct, target, std::move(positional), std::move(kwargs),
                            timeout_ms);
    if (auto fail = construct_failure(r, target, nc.gen, shown, case_index)) {
      return std::move(*fail);
    }
    return handle_from(r, target, nc.gen, std::move(shown));
  }

  Resolved resolve(const Draft& d, std::uint64_t timeout_ms, std::size_t case_index) {
    if (d.constructs.empty()) return d.value;
    std::vector<Value> handles;
    for (const auto& nc : d.constructs) {
      Resolved r = construct(nc, timeout_ms, case_index);
      if (std::holds_alternative<CaseOutcome>(r)) return r;
      handles.push_back(std::get<Value>(std::move(r)));
    }
    return substitute(d.value, handles);
  }

  ResolvedBinding resolve_binding(const DraftBinding& db, std::uint64_t timeout_ms,
                                  std::size_t case_index) {
    Binding out;
    for (const auto& [name, d] : db) {
      Resolved r = resolve(d, timeout_ms, case_index);
      if (auto* fail = std::get_if<CaseOutcome>(&r)) return std::move(*fail);
      out.emplace_back(name, std::get<Value>(std::move(r)));
    }
    return out;
  }

  // Draws arguments and checks preconditions; on rejection fills `o`.
  std::optional<DraftBinding> draw_checked(const FunctionAnnotations& fa, GenContext& ctx,
                                           CaseOutcome& o) {
    DraftBinding d;
    try {
      d = gen_.generate_args(fa, ctx);
    } catch (const GenerationFailed& e) {
      o.status = CaseStatus::Rejected;
      o.message = e.what();
      return std::nullopt;
    }
    o.binding = draft_values(d);
    for (const auto& r : fa.preconditions) {
      const EvalResult res = eval(r, o.binding);
      if (const auto* err = std::get_if<EvalError>(&res)) {
        o.status = CaseStatus::EvalErrorRejected;
        o.message = std::string(eval_error_kind_name(err->kind)) + " in " + err->path;
        return std::nullopt;
      }
      if (!std::get<bool>(res)) {
        o.status = CaseStatus::Rejected;
        return std::nullopt;
      }
    }
    return d;
  }

  // Arguments and precondition owner of whatever a crash is attributed to.
  struct ShrinkSubject {
    const FunctionAnnotations* fa;
    Op op;
    std::string wire;
  };
  std::optional<ShrinkSubject> shrink_subject(const CaseOutcome& o, const Target& t) const;

  const AnnotationSpec& spec_;
  const CampaignConfig& cfg_;
  Session& worker_;
  Generator gen_;
  // Handles built since the last reset.
  std::map<std::uint64_t, std::pair<Value, Binding>> built_;
};

std::vector<CaseOutcome> Runner::run_cases(const Target& t) {
  GenContext ctx(block_seed(cfg_.seed, t.block), cfg_.gen);
  std::vector<CaseOutcome> out;
  // Nothing to vary: a single case says all there is to say.
  const std::size_t limit = (t.fa->args.empty() && !t.ctor) ? 1 : cfg_.max_examples;
  std::size_t dispatched = 0;
  std::size_t attempts = 0;
  std::size_t rejected = 0;
  std::size_t consecutive = 0;

  auto reject = [&](CaseOutcome o) {
    out.push_back(std::move(o));
    ++rejected;
    ++consecutive;
    if (consecutive >= cfg_.max_consecutive_rejections ||
        (attempts >= cfg_.ratio_min_attempts &&
         static_cast<double>(rejected) > cfg_.max_rejection_ratio * static_cast<double>(attempts))) {
      throw FilterTooMuch(attempts, rejected, std::move(out));
    }
  };

  try {
    while (dispatched < limit) {
      CaseOutcome o;
      o.case_index = attempts++;
      o.attributed_to = t.block;

      DraftBinding ctor_draft;
      if (t.ctor) {
        auto d = draw_checked(*t.ctor, ctx, o);
        if (!d) {
          reject(std::move(o));
          continue;
        }
        ctor_draft = std::move(*d);
      }
      auto draft = draw_checked(*t.fa, ctx, o);
      if (!draft) {
        reject(std::move(o));
        continue;
      }
      consecutive = 0;
      ++dispatched;

      std::optional<Value> receiver = t.receiver;
      if (t.ctor) {
        const std::string ctor_block = constructor_name(t.class_name);
        ResolvedBinding rb = resolve_binding(ctor_draft, t.timeout_ms, o.case_index);
        if (auto* fail = std::get_if<CaseOutcome>(&rb)) {
          out.push_back(std::move(*fail));
          continue;
        }
        Binding ctor_args = std::get<Binding>(std::move(rb));
        const Response r = send(Op::Construct, t.class_name, {}, kwargs_of(ctor_args),
                                t.timeout_ms);
        if (auto fail = construct_failure(r, t.class_name, ctor_block, ctor_args, o.case_index)) {
          out.push_back(std::move(*fail));
          continue;
        }
        receiver = handle_from(r, t.class_name, t.class_name, std::move(ctor_args));
      }

      ResolvedBinding rb = resolve_binding(*draft, t.timeout_ms, o.case_index);
      if (auto* fail = std::get_if<CaseOutcome>(&rb)) {
        out.push_back(std::move(*fail));
        continue;
      }
      o.binding = std::get<Binding>(std::move(rb));
      o.receiver = receiver;
      o.message.clear();
      const Response r = dispatch(t, o.binding, receiver);
      switch (r.status) {
        case Status::Ok:
          o.status = CaseStatus::Pass;
          break;
        case Status::Crash:
          o.status = CaseStatus::Crash;
          record_failure(r, o);
          break;
        case Status::Timeout:
          o.status = CaseStatus::Timeout;
          o.message = r.message.value_or("");
          break;
        case Status::Invalid:
          throw InvalidTarget(t.wire, r.message.value_or(""));
      }
      out.push_back(std::move(o));
    }
  } catch (InvalidTarget& e) {
    e.outcomes() = std::move(out);
    throw;
  }
  return out;
}

Value Runner::build_instance(const std::string& class_name, const FunctionAnnotations& ctor,
                             std::uint64_t timeout_ms) {
  std::vector<Value> args;
  Binding shown;
  for (const auto& item : *ctor.cc_example) {
    Value v;
    if (const auto* lit = std::get_if<Value>(&item)) {
      v = *lit;
    } else {
      Resolved r = construct(gen_.gen_call(std::get<GenCall>(item)), timeout_ms, 0);
      if (auto* fail = std::get_if<CaseOutcome>(&r)) throw ConstructorFailed(std::move(*fail));
      v = std::get<Value>(std::move(r));
    }
    shown.emplace_back(std::to_string(args.size()), v);
    args.push_back(std::move(v));
  }
  const Response r = send(Op::Construct, class_name, std::move(args), std::nullopt, timeout_ms);
  if (auto fail = construct_failure(r, class_name, constructor_name(class_name), shown, 0)) {
    throw ConstructorFailed(std::move(*fail));
  }
  return handle_from(r, class_name, class_name, std::move(shown));
}

std::optional<Runner::ShrinkSubject> Runner::shrink_subject(const CaseOutcome& o,
                                                            const Target& t) const {
  if (o.status == CaseStatus::Crash) return ShrinkSubject{t.fa, t.op, t.wire};
  const FunctionAnnotations* fa = spec_.generator(o.attributed_to);
  if (!fa) fa = spec_.function(o.attributed_to);
  if (!fa) return std::nullopt;
  // Literal generator calls bind positionally and have no constraints.
  if (fa->arg_names().size() != o.binding.size()) return std::nullopt;
  for (std::size_t i = 0; i < o.binding.size(); ++i) {
    if (fa->args[i].first != o.binding[i].first) return std::nullopt;
  }
  return ShrinkSubject{fa, Op::Construct, construct_target(o.attributed_to)};
}

void Runner::shrink_into(const std::vector<CaseOutcome>& outcomes, const Target& t,
                         std::vector<UniqueCrash>& sink) {
  // Group by the block each crash belongs to, then by signature.
  std::vector<std::string> blocks;
  for (const auto& o : outcomes) {
    if (std::find(blocks.begin(), blocks.end(), o.attributed_to) == blocks.end()) {
      blocks.push_back(o.attributed_to);
    }
  }
  for (const auto& block : blocks) {
    std::vector<CaseOutcome> mine;
    for (const auto& o : outcomes) {
      if (o.attributed_to == block) mine.push_back(o);
    }
    for (auto& [sig, entry] : dedup(mine)) {
      auto existing = std::find_if(sink.begin(), sink.end(), [&](const UniqueCrash& u) {
        return u.attributed_to == block && u.signature == sig;
      });
      if (existing != sink.end()) {
        existing->count += entry.count;
        continue;
      }
      UniqueCrash u{block, sig, entry.count, entry.representative, 0, {}};
      const auto subject = shrink_subject(u.representative, t);
      if (subject && !subject->fa->args.empty()) {
        Tuples shape;
        std::vector<Value> start;
        for (const auto& [name, c] : subject->fa->args) shape.components.push_back(c);
        for (const auto& [name, v] : u.representative.binding) start.push_back(v);
        const Constraint whole(std::move(shape));
        const auto names = subject->fa->arg_names();
        std::optional<Value> last_value;
        Response last_response;
        Target probe_target = t;
        probe_target.op = subject->op;
        probe_target.wire = subject->wire;
        probe_target.timeout_ms = t.timeout_ms;
        const std::optional<Value> receiver =
            subject->op == Op::Call ? u.representative.receiver : std::nullopt;
        auto still_fails = [&](const Value& candidate) {
          Binding b;
          const auto& items = candidate.sequence_items();
          for (std::size_t i = 0; i < names.size(); ++i) b.emplace_back(names[i], items[i]);
          if (!requires_hold(*subject->fa, b)) return false;
          const Response r = dispatch(probe_target, b, receiver);
          if (r.status == Status::Invalid) throw InvalidTarget(probe_target.wire, r.message.value_or(""));
          if (r.status != Status::Crash || signature_of(r) != sig) return false;
          last_value = candidate;
          last_response = r;
          return true;
        };
        ShrinkStats stats;
        const Value shrunk = shrink(Value::tuple(std::move(start)), whole, still_fails,
                                    cfg_.shrink_budget, &stats);
        u.shrink_evaluations = stats.evaluations;
        if (last_value && structural_eq(*last_value, shrunk)) {
          const auto& items = shrunk.sequence_items();
          for (std::size_t i = 0; i < names.size(); ++i) u.representative.binding[i].second = items[i];
          record_failure(last_response, u.representative);
        }
      }
      if (u.representative.receiver) collect_objects(*u.representative.receiver, u.objects);
      for (const auto& [_, v] : u.representative.binding) collect_objects(v, u.objects);
      sink.push_back(std::move(u));
    }
  }
}

const FunctionAnnotations* member_ctor(const AnnotationSpec& spec, const std::string& name,
                                       std::string* class_name) {
  const auto mn = split_method_name(name);
  if (!mn) return nullptr;
  const FunctionAnnotations* ctor = spec.function(constructor_name(mn->class_name));
  if (ctor && class_name) *class_name = mn->class_name;
  return ctor;
}

}  // namespace

std::vector<CaseOutcome> run_function_campaign(const AnnotationSpec& spec, const std::string& name,
                                               const FunctionAnnotations& fa,
                                               const CampaignConfig& cfg, Session& worker) {
  Runner runner(spec, cfg, worker);
  Target t;
  const auto mn = split_method_name(name);
  const bool builds = spec.generator(name) != nullptr || (mn && mn->method == "__init__");
  t.op = builds ? Op::Construct : Op::Call;
  t.wire = builds ? construct_target(name) : name;
  t.block = name;
  t.fa = &fa;
  t.timeout_ms = runner.timeout_for(fa);
  return runner.run_cases(t);
}

std::vector<CaseOutcome> run_method_campaign(const AnnotationSpec& spec,
                                             const std::string& class_name,
                                             const std::string& method_name,
                                             const FunctionAnnotations& method,
                                             const FunctionAnnotations* ctor,
                                             const CampaignConfig& cfg, Session& worker) {
  if (!ctor) throw MissingConstructor(class_name);
  Runner runner(spec, cfg, worker);
  Target t;
  t.op = Op::Call;
  t.wire = class_name + "." + method_name;
  t.block = t.wire;
  t.fa = &method;
  t.class_name = class_name;
  t.timeout_ms = runner.timeout_for(method);
  if (ctor->cc_example) {
    t.receiver = runner.build_instance(class_name, *ctor, t.timeout_ms);
  } else {
    t.ctor = ctor;
  }
  return runner.run_cases(t);
}

std::vector<CaseOutcome> run_module_tests(const AnnotationSpec& spec, const CampaignConfig& cfg,
                                          Session& worker) {
  std::vector<CaseOutcome> out;
  for (const auto& module : spec.module_tests) {
    Request req;
    req.op = Op::ModuleTest;
    req.target = module;
    req.timeout_ms = to_ms(cfg.default_timeout_s);
    const Response r = worker.call(req);
    CaseOutcome o;
    o.case_index = 0;
    o.attributed_to = module;
    switch (r.status) {
      case Status::Ok: o.status = CaseStatus::Pass; break;
      case Status::Crash:
        o.status = CaseStatus::Crash;
        record_failure(r, o);
        break;
      case Status::Timeout:
        o.status = CaseStatus::Timeout;
        o.message = r.message.value_or("");
        break;
      case Status::Invalid: throw InvalidTarget(module, r.message.value_or(""), std::move(out));
    }
    out.push_back(std::move(o));
  }
  return out;
}

CampaignResult run_campaign(const AnnotationSpec& spec, const CampaignConfig& cfg, Session& worker,
                            const std::vector<std::string>& only) {
  CampaignResult res;
  Runner runner(spec, cfg, worker);
  auto selected = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };

  auto run_block = [&](FunctionRun run, const Target& t, auto&& body) {
    runner.reset();
    try {
      run.outcomes = body();
    } catch (const FilterTooMuch& e) {
      run.verdict = Verdict::FilterTooMuch;
      run.note = e.what();
      run.outcomes = e.outcomes();
    } catch (const InvalidTarget& e) {
      run.verdict = Verdict::Invalid;
      run.note = e.what();
      run.outcomes = e.outcomes();
      res.worker_failure = true;
    } catch (const ConstructorFailed& e) {
      run.verdict = Verdict::ConstructorFailed;
      run.note = e.what();
      run.outcomes = {e.outcome()};
    }
    try {
      runner.shrink_into(run.outcomes, t, res.crashes);
    } catch (const InvalidTarget& e) {
      run.verdict = Verdict::Invalid;
      run.note = e.what();
      res.worker_failure = true;
    }
    res.runs.push_back(std::move(run));
    return res.runs.back().verdict;
  };

  std::set<std::string> ctor_done;
  std::set<std::string> aborted;

  auto plain_target = [&](const std::string& name, const FunctionAnnotations& fa, Op op) {
    Target t;
    t.op = op;
    t.wire = op == Op::Construct ? construct_target(name) : name;
    t.block = name;
    t.fa = &fa;
    t.timeout_ms = runner.timeout_for(fa);
    return t;
  };

  auto run_ctor = [&](const std::string& name) {
    if (!ctor_done.insert(name).second) return;
    const FunctionAnnotations* ctor = spec.function(name);
    if (ctor->excluded || !selected(name)) return;
    // A constructor known only through its example has nothing to generate.
    if (ctor->cc_example && ctor->args.empty()) return;
    const Target t = plain_target(name, *ctor, Op::Construct);
    run_block(FunctionRun{name, "constructor", Verdict::Ok, {}, {}}, t,
              [&] { return runner.run_cases(t); });
  };

  for (const auto& [name, fa] : spec.functions) {
    std::string cls;
    const FunctionAnnotations* ctor = member_ctor(spec, name, &cls);
    if (ctor && name == constructor_name(cls)) {
      run_ctor(name);
      continue;
    }
    if (ctor) run_ctor(constructor_name(cls));
    if (fa.excluded || !selected(name)) continue;
    if (!ctor) {
      const Target t = plain_target(name, fa, Op::Call);
      run_block(FunctionRun{name, "function", Verdict::Ok, {}, {}}, t,
                [&] { return runner.run_cases(t); });
      continue;
    }
    if (aborted.count(cls)) {
      res.runs.push_back(FunctionRun{name, "method", Verdict::Skipped,
                                     "constructor example of '" + cls + "' crashed", {}});
      continue;
    }
    Target t;
    t.op = Op::Call;
    t.wire = name;
    t.block = name;
    t.fa = &fa;
    t.class_name = cls;
    t.timeout_ms = runner.timeout_for(fa);
    if (!ctor->cc_example) t.ctor = ctor;
    bool ctor_failed = false;
    runner.reset();
    if (ctor->cc_example) {
      try {
        t.receiver = runner.build_instance(cls, *ctor, t.timeout_ms);
      } catch (const ConstructorFailed& e) {
        ctor_failed = true;
        aborted.insert(cls);
        // One entry for the constructor, reused if its own campaign already ran.
        const std::string ctor_block = constructor_name(cls);
        auto entry = std::find_if(res.runs.begin(), res.runs.end(),
                                  [&](const FunctionRun& r) { return r.name == ctor_block; });
        if (entry == res.runs.end()) {
          res.runs.push_back(FunctionRun{ctor_block, "constructor", Verdict::Ok, {}, {}});
          entry = std::prev(res.runs.end());
        }
        entry->verdict = Verdict::ConstructorFailed;
        entry->note = "constructor example crashed; methods of '" + cls + "' not tested";
        entry->outcomes.push_back(e.outcome());
        if (e.outcome().signature) {
          res.crashes.push_back(UniqueCrash{e.outcome().attributed_to, *e.outcome().signature, 1,
                                            e.outcome(), 0, {}});
        }
        res.runs.push_back(FunctionRun{name, "method", Verdict::Skipped,
                                       "constructor example of '" + cls + "' crashed", {}});
      } catch (const InvalidTarget& e) {
        ctor_failed = true;
        res.worker_failure = true;
        res.runs.push_back(FunctionRun{name, "method", Verdict::Invalid, e.what(), {}});
      }
    }
    if (ctor_failed) continue;
    // The instance lives in the worker's handle table, so no second reset.
    FunctionRun run{name, "method", Verdict::Ok, {}, {}};
    try {
      run.outcomes = runner.run_cases(t);
    } catch (const FilterTooMuch& e) {
      run.verdict = Verdict::FilterTooMuch;
      run.note = e.what();
      run.outcomes = e.outcomes();
    } catch (const InvalidTarget& e) {
      run.verdict = Verdict::Invalid;
      run.note = e.what();
      run.outcomes = e.outcomes();
      res.worker_failure = true;
    }
    try {
      runner.shrink_into(run.outcomes, t, res.crashes);
    } catch (const InvalidTarget& e) {
      run.verdict = Verdict::Invalid;
      run.note = e.what();
      res.worker_failure = true;
    }
    res.runs.push_back(std::move(run));
  }

  for (const auto& [name, fa] : spec.generators) {
    if (fa.excluded || !selected(name)) continue;
    const Target t = plain_target(name, fa, Op::Construct);
    run_block(FunctionRun{name, "generator", Verdict::Ok, {}, {}}, t,
              [&] { return runner.run_cases(t); });
  }

  for (const auto& module : spec.module_tests) {
    if (!selected(module)) continue;
    AnnotationSpec one;
    one.module_tests = {module};
    FunctionAnnotations none;
    Target t;
    t.fa = &none;
    t.block = module;
    run_block(FunctionRun{module, "module", Verdict::Ok, {}, {}}, t,
              [&] { return run_module_tests(one, cfg, worker); });
  }
  return res;
}

}  // namespace ancheck
