#include "ancheck/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ancheck/campaign.hpp"
#include "ancheck/errors.hpp"
#include "ancheck/report.hpp"
#include "ancheck/session.hpp"
#include "ancheck/spec.hpp"

namespace ancheck {

namespace {

bool known_block(const AnnotationSpec& spec, const std::string& name) {
  if (spec.function(name) || spec.generator(name)) return true;
  for (const auto& m : spec.module_tests) {
    if (m == name) return true;
  }
  return false;
}

}  // namespace

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annotation-driven fuzzing of a subject program over a line protocol"};
  app.name("ancheck");
  std::string spec_path;
  std::string worker_cmd;
  std::string report_path;
  std::string format = "human";
  std::vector<std::string> only;
  CampaignConfig cfg;
  bool timing = false;
  bool check_only = false;
  app.add_option("--spec", spec_path, "annotation file (.an)")->required();
  app.add_option("--worker", worker_cmd, "command that starts a protocol worker");
  app.add_option("--seed", cfg.seed, "campaign seed");
  app.add_option("--max-examples", cfg.max_examples, "dispatched cases per function");
  app.add_option("--timeout", cfg.default_timeout_s, "default per-call timeout in seconds");
  app.add_option("--shrink-budget", cfg.shrink_budget, "worker calls allowed per shrink");
  app.add_option("--only", only, "restrict to these functions, generators or module tests");
  app.add_option("--report", report_path, "write the JSON report here");
  app.add_option("--format", format, "stdout format")->check(CLI::IsMember({"human", "json"}));
  app.add_flag("--timing", timing, "include wall time in the report");
  app.add_flag("--check", check_only, "parse the annotation file and print it canonically");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "ancheck: " << e.what() << "\n";
    return kExitUsage;
  }

  std::ifstream in(spec_path, std::ios::binary);
  if (!in) {
    err << "ancheck: cannot read " << spec_path << "\n";
    return kExitUsage;
  }
  std::ostringstream text;
  text << in.rdbuf();
  AnnotationSpec spec;
  try {
    spec = parse_spec(text.str());
  } catch (const SpecError& e) {
    err << spec_path << ":" << e.what() << "\n";
    return kExitUsage;
  }
  if (check_only) {
    out << render_spec(spec);
    return kExitClean;
  }
  if (worker_cmd.empty()) {
    err << "ancheck: --worker is required\n";
    return kExitUsage;
  }
  for (const auto& name : only) {
    if (!known_block(spec, name)) {
      err << "ancheck: --only names unknown block '" << name << "'\n";
      return kExitUsage;
    }
  }
  if (const auto problems = cfg.problems(); !problems.empty()) {
    for (const auto& p : problems) err << "ancheck: " << p << "\n";
    return kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  CampaignReport report;
  try {
    Session session(std::make_unique<SubprocessChannel>(worker_cmd, spec.subject));
    session.start();
    const CampaignResult result = run_campaign(spec, cfg, session, only);
    session.shutdown();
    report = make_report(spec, cfg, result);
  } catch (const ProtocolError& e) {
    err << "ancheck: worker failure: " << e.what() << "\n";
    return kExitWorker;
  }
  if (timing) {
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }

  const std::string json = render_json(report);
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::binary);
    f << json;
    if (!f) {
      err << "ancheck: cannot write " << report_path << "\n";
      return kExitUsage;
    }
  }
  out << (format == "json" ? json : render_human(report));
  if (report.worker_failure) {
    for (const auto& f : report.functions) {
      if (f.verdict == "invalid") err << "ancheck: " << f.note << "\n";
    }
    return kExitWorker;
  }
  return report.unique_bugs() == 0 ? kExitClean : kExitCrashes;
}

}  // namespace ancheck
