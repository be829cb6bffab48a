#include "ancheck/report.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "ancheck/literal.hpp"
#include "json.hpp"

namespace ancheck {

using ojson = nlohmann::ordered_json;

std::size_t CampaignReport::total_dispatched() const {
  std::size_t n = 0;
  for (const auto& f : functions) n += f.dispatched;
  return n;
}

std::size_t CampaignReport::total_rejected() const {
  std::size_t n = 0;
  for (const auto& f : functions) n += f.rejected + f.eval_error_rejected;
  return n;
}

std::size_t CampaignReport::total_crash_occurrences() const {
  std::size_t n = 0;
  for (const auto& f : functions) {
    for (const auto& b : f.bugs) n += b.count;
  }
  return n;
}

std::size_t CampaignReport::unique_bugs() const {
  std::size_t n = 0;
  for (const auto& f : functions) n += f.bugs.size();
  return n;
}

namespace {

std::string binding_literal(const Binding& b) {
  std::vector<std::pair<Value, Value>> entries;
  for (const auto& [name, v] : b) entries.emplace_back(Value::str(name), v);
  return render_literal(Value::dict(std::move(entries)));
}

}  // namespace

CampaignReport make_report(const AnnotationSpec& spec, const CampaignConfig& cfg,
                           const CampaignResult& result) {
  CampaignReport r;
  r.subject = spec.subject;
  r.seed = cfg.seed;
  r.config = {cfg.max_examples,   cfg.max_rejection_ratio, cfg.max_consecutive_rejections,
              cfg.default_timeout_s, cfg.shrink_budget,     cfg.gen.boundary_bias};
  r.worker_failure = result.worker_failure;
  for (const auto& run : result.runs) {
    FunctionSummary s;
    s.name = run.name;
    s.kind = run.kind;
    s.verdict = std::string(verdict_name(run.verdict));
    s.note = run.note;
    for (const auto& o : run.outcomes) {
      switch (o.status) {
        case CaseStatus::Pass: ++s.passed; ++s.dispatched; break;
        case CaseStatus::Crash: ++s.crashed; ++s.dispatched; break;
        case CaseStatus::Timeout: ++s.timeouts; ++s.dispatched; break;
        case CaseStatus::ConstructCrash: ++s.construct_crashes; ++s.dispatched; break;
        case CaseStatus::Rejected: ++s.rejected; break;
        case CaseStatus::EvalErrorRejected: ++s.eval_error_rejected; break;
      }
    }
    r.functions.push_back(std::move(s));
  }
  for (const auto& u : result.crashes) {
    auto owner = std::find_if(r.functions.begin(), r.functions.end(),
                              [&](const FunctionSummary& f) { return f.name == u.attributed_to; });
    if (owner == r.functions.end()) {
      FunctionSummary s;
      s.name = u.attributed_to;
      s.kind = spec.generator(u.attributed_to) ? "generator" : "constructor";
      s.verdict = "untested";
      r.functions.push_back(std::move(s));
      owner = std::prev(r.functions.end());
    }
    BugReport b;
    b.exc_type = u.signature.exc_type;
    b.location = u.signature.location;
    b.count = u.count;
    b.message = u.representative.message;
    b.frames = u.representative.frames;
    b.reproducer = binding_literal(u.representative.binding);
    if (u.representative.receiver) b.receiver = render_literal(*u.representative.receiver);
    for (const auto& [h, args] : u.objects) {
      b.objects.push_back(render_literal(h) + " <- " + binding_literal(args));
    }
    b.shrink_evaluations = u.shrink_evaluations;
    owner->bugs.push_back(std::move(b));
  }
  return r;
}

std::string render_json(const CampaignReport& r) {
  ojson j;
  j["report_version"] = r.report_version;
  j["subject"] = r.subject;
  j["seed"] = r.seed;
  j["config"] = {
      {"max_examples", r.config.max_examples},
      {"max_rejection_ratio", r.config.max_rejection_ratio},
      {"max_consecutive_rejections", r.config.max_consecutive_rejections},
      {"default_timeout_s", r.config.default_timeout_s},
      {"shrink_budget", r.config.shrink_budget},
      {"boundary_bias", r.config.boundary_bias},
  };
  j["functions"] = ojson::array();
  for (const auto& f : r.functions) {
    ojson bugs = ojson::array();
    for (const auto& b : f.bugs) {
      ojson e = {
          {"exc_type", b.exc_type},
          {"location", b.location},
          {"count", b.count},
          {"message", b.message},
          {"frames", b.frames},
          {"reproducer", b.reproducer},
      };
      if (b.receiver) e["receiver"] = *b.receiver;
      e["objects"] = b.objects;
      e["shrink_evaluations"] = b.shrink_evaluations;
      bugs.push_back(std::move(e));
    }
    j["functions"].push_back({
        {"name", f.name},
        {"kind", f.kind},
        {"verdict", f.verdict},
        {"note", f.note},
        {"dispatched", f.dispatched},
        {"passed", f.passed},
        {"crashed", f.crashed},
        {"timeouts", f.timeouts},
        {"construct_crashes", f.construct_crashes},
        {"rejected", f.rejected},
        {"eval_error_rejected", f.eval_error_rejected},
        {"bugs", std::move(bugs)},
    });
  }
  j["totals"] = {
      {"dispatched", r.total_dispatched()},
      {"rejected", r.total_rejected()},
      {"unique_bugs", r.unique_bugs()},
      {"crash_occurrences", r.total_crash_occurrences()},
  };
  j["worker_failure"] = r.worker_failure;
  if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
  return j.dump(2) + "\n";
}

CampaignReport parse_report(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw std::runtime_error(std::string("report is not JSON: ") + e.what());
  }
  try {
    CampaignReport r;
    r.report_version = j.at("report_version").get<int>();
    if (r.report_version != kReportVersion) {
      throw std::runtime_error("unsupported report_version " + std::to_string(r.report_version));
    }
    r.subject = j.at("subject").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    r.config.max_examples = c.at("max_examples").get<std::size_t>();
    r.config.max_rejection_ratio = c.at("max_rejection_ratio").get<double>();
    r.config.max_consecutive_rejections = c.at("max_consecutive_rejections").get<std::size_t>();
    r.config.default_timeout_s = c.at("default_timeout_s").get<double>();
    r.config.shrink_budget = c.at("shrink_budget").get<std::size_t>();
    r.config.boundary_bias = c.at("boundary_bias").get<double>();
    for (const auto& f : j.at("functions")) {
      FunctionSummary s;
      s.name = f.at("name").get<std::string>();
      s.kind = f.at("kind").get<std::string>();
      s.verdict = f.at("verdict").get<std::string>();
      s.note = f.at("note").get<std::string>();
      s.dispatched = f.at("dispatched").get<std::size_t>();
      s.passed = f.at("passed").get<std::size_t>();
      s.crashed = f.at("crashed").get<std::size_t>();
      s.timeouts = f.at("timeouts").get<std::size_t>();
      s.construct_crashes = f.at("construct_crashes").get<std::size_t>();
      s.rejected = f.at("rejected").get<std::size_t>();
      s.eval_error_rejected = f.at("eval_error_rejected").get<std::size_t>();
      for (const auto& e : f.at("bugs")) {
        BugReport b;
        b.exc_type = e.at("exc_type").get<std::string>();
        b.location = e.at("location").get<std::string>();
        b.count = e.at("count").get<std::size_t>();
        b.message = e.at("message").get<std::string>();
        b.frames = e.at("frames").get<std::vector<std::string>>();
        b.reproducer = e.at("reproducer").get<std::string>();
        if (e.contains("receiver")) b.receiver = e.at("receiver").get<std::string>();
        b.objects = e.at("objects").get<std::vector<std::string>>();
        b.shrink_evaluations = e.at("shrink_evaluations").get<std::size_t>();
        s.bugs.push_back(std::move(b));
      }
      r.functions.push_back(std::move(s));
    }
    r.worker_failure = j.at("worker_failure").get<bool>();
    if (j.contains("wall_time_s")) r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
  } catch (const ojson::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
}

std::string render_human(const CampaignReport& r) {
  std::ostringstream out;
  out << "subject " << r.subject << "  seed " << r.seed << "\n\n";
  std::size_t width = 8;
  for (const auto& f : r.functions) width = std::max(width, f.name.size());
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  out << pad("function", width) << "  " << pad("verdict", 18) << "  cases  rejected  crashes\n";
  for (const auto& f : r.functions) {
    const std::string cases = std::to_string(f.dispatched);
    const std::string rejected = std::to_string(f.rejected + f.eval_error_rejected);
    const std::string crashes = std::to_string(f.crashed + f.construct_crashes);
    out << pad(f.name, width) << "  " << pad(f.verdict, 18) << "  "
        << std::string(5 - std::min<std::size_t>(5, cases.size()), ' ') << cases << "  "
        << std::string(8 - std::min<std::size_t>(8, rejected.size()), ' ') << rejected << "  "
        << std::string(7 - std::min<std::size_t>(7, crashes.size()), ' ') << crashes << "\n";
    if (!f.note.empty() && f.verdict != "ok") out << "  " << f.note << "\n";
  }
  const std::size_t unique = r.unique_bugs();
  out << "\n" << unique << (unique == 1 ? " unique bug" : " unique bugs");
  out << " from " << r.total_crash_occurrences() << " crashing cases\n";
  std::size_t n = 0;
  for (const auto& f : r.functions) {
    for (const auto& b : f.bugs) {
      out << "\n[" << ++n << "] " << f.name << ": " << b.exc_type << " at " << b.location
          << " (x" << b.count << ")\n";
      if (!b.message.empty()) out << "    " << b.message << "\n";
      if (b.receiver) out << "    on " << *b.receiver << "\n";
      out << "    reproducer: " << b.reproducer << "\n";
      for (const auto& o : b.objects) out << "      " << o << "\n";
    }
  }
  if (r.wall_time_s) out << "\nwall time " << format_double(*r.wall_time_s) << " s\n";
  return out.str();
}

}  // namespace ancheck
