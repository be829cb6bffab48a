#pragma once

// Campaign reports: a versioned machine form (JSON) and a human table.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ancheck/campaign.hpp"

namespace ancheck {

inline constexpr int kReportVersion = 1;

struct BugReport {
  std::string exc_type;
  std::string location;
  std::size_t count = 0;
  std::string message;
  std::vector<std::string> frames;
  // `.an` dict literal of the shrunk arguments, e.g. {"depth": 10}.
  std::string reproducer;
  std::optional<std::string> receiver;
  // `handle(3, "gen") <- {"x": 0}` for every object the reproducer needs.
  std::vector<std::string> objects;
  std::size_t shrink_evaluations = 0;

  bool operator==(const BugReport&) const = default;
};

struct FunctionSummary {
  std::string name;
  std::string kind;
  std::string verdict;
  std::string note;
  std::size_t dispatched = 0;
  std::size_t passed = 0;
  std::size_t crashed = 0;
  std::size_t timeouts = 0;
  std::size_t construct_crashes = 0;
  std::size_t rejected = 0;
  std::size_t eval_error_rejected = 0;
  std::vector<BugReport> bugs;  // unique crashes attributed here

  bool operator==(const FunctionSummary&) const = default;
};

struct ReportConfig {
  std::size_t max_examples = 0;
  double max_rejection_ratio = 0;
  std::size_t max_consecutive_rejections = 0;
  double default_timeout_s = 0;
  std::size_t shrink_budget = 0;
  double boundary_bias = 0;

  bool operator==(const ReportConfig&) const = default;
};

struct CampaignReport {
  int report_version = kReportVersion;
  std::string subject;
  std::uint64_t seed = 0;
  ReportConfig config;
  std::vector<FunctionSummary> functions;
  bool worker_failure = false;
  std::optional<double> wall_time_s;

  std::size_t total_dispatched() const;
  std::size_t total_rejected() const;
  std::size_t total_crash_occurrences() const;
  std::size_t unique_bugs() const;

  bool operator==(const CampaignReport&) const = default;
};

// Crashes attributed to a block without a run of its own (an excluded
// generator, say) get an "untested" entry.
CampaignReport make_report(const AnnotationSpec& spec, const CampaignConfig& cfg,
                           const CampaignResult& result);

// Two-space indented JSON with a fixed key order and a trailing newline.
std::string render_json(const CampaignReport& r);

// Inverse of render_json. Throws std::runtime_error on malformed input or an
// unknown report_version.
CampaignReport parse_report(std::string_view json);

std::string render_human(const CampaignReport& r);

}  // namespace ancheck
