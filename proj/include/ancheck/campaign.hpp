#pragma once

// Campaign orchestration: generate, filter, construct, dispatch, classify,
// deduplicate and shrink.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ancheck/random.hpp"
#include "ancheck/session.hpp"
#include "ancheck/spec.hpp"
#include "ancheck/value.hpp"

namespace ancheck {

struct CampaignConfig {
  std::size_t max_examples = 100;
  double max_rejection_ratio = 0.9;
  std::size_t max_consecutive_rejections = 50;
  std::size_t ratio_min_attempts = 100;
  double default_timeout_s = 60;
  std::uint64_t seed = 0;
  std::size_t shrink_budget = 200;
  GenConfig gen;

  // Empty when usable.
  std::vector<std::string> problems() const;
};

enum class CaseStatus { Pass, Crash, Timeout, Rejected, EvalErrorRejected, ConstructCrash };

std::string_view case_status_name(CaseStatus s);

struct CrashSignature {
  std::string exc_type;
  std::string location;

  auto operator<=>(const CrashSignature&) const = default;
};

struct CaseOutcome {
  std::size_t case_index = 0;
  // Arguments of whatever crashed: the function's own, or for a
  // construct_crash those of the generator or constructor.
  Binding binding;
  CaseStatus status = CaseStatus::Pass;
  std::optional<CrashSignature> signature;
  std::string attributed_to;
  std::string message;
  std::vector<std::string> frames;
  std::optional<Value> receiver;  // instance a method case ran on

  bool operator==(const CaseOutcome&) const = default;
};

// Too many candidates were rejected by preconditions.
class FilterTooMuch : public std::runtime_error {
 public:
  FilterTooMuch(std::size_t attempts, std::size_t rejected, std::vector<CaseOutcome> outcomes);
  std::size_t attempts() const { return attempts_; }
  std::size_t rejected() const { return rejected_; }
  const std::vector<CaseOutcome>& outcomes() const { return outcomes_; }

 private:
  std::size_t attempts_;
  std::size_t rejected_;
  std::vector<CaseOutcome> outcomes_;
};

class MissingConstructor : public std::runtime_error {
 public:
  explicit MissingConstructor(const std::string& class_name)
      : std::runtime_error("class '" + class_name + "' has no annotated constructor") {}
};

// The worker answered `invalid` (unknown target, undecodable value).
class InvalidTarget : public std::runtime_error {
 public:
  InvalidTarget(const std::string& target, const std::string& detail,
                std::vector<CaseOutcome> outcomes = {})
      : std::runtime_error("worker rejected '" + target + "' as invalid: " + detail),
        outcomes_(std::move(outcomes)) {}
  const std::vector<CaseOutcome>& outcomes() const { return outcomes_; }
  std::vector<CaseOutcome>& outcomes() { return outcomes_; }

 private:
  std::vector<CaseOutcome> outcomes_;
};

// Building the single instance from a constructor's example inputs crashed.
class ConstructorFailed : public std::runtime_error {
 public:
  explicit ConstructorFailed(CaseOutcome outcome)
      : std::runtime_error("constructor example crashed"), outcome_(std::move(outcome)) {}
  const CaseOutcome& outcome() const { return outcome_; }

 private:
  CaseOutcome outcome_;
};

// Runs one plain function (or generator) campaign. Sends no reset.
std::vector<CaseOutcome> run_function_campaign(const AnnotationSpec& spec,
                                               const std::string& name,
                                               const FunctionAnnotations& fa,
                                               const CampaignConfig& cfg, Session& worker);

// Method "C.m": the receiver comes from the constructor's cc_example (built
// once) or is constructed per case from its annotations.
std::vector<CaseOutcome> run_method_campaign(const AnnotationSpec& spec,
                                             const std::string& class_name,
                                             const std::string& method_name,
                                             const FunctionAnnotations& method,
                                             const FunctionAnnotations* ctor,
                                             const CampaignConfig& cfg, Session& worker);

// One module_test request per listed module.
std::vector<CaseOutcome> run_module_tests(const AnnotationSpec& spec, const CampaignConfig& cfg,
                                          Session& worker);

struct DedupEntry {
  std::size_t count = 0;
  CaseOutcome representative;
};

// Groups crash and construct_crash outcomes by signature. The representative
// has the fewest scalar leaves in its binding, ties going to the lower
// case_index.
std::map<CrashSignature, DedupEntry> dedup(const std::vector<CaseOutcome>& outcomes);

enum class Verdict { Ok, FilterTooMuch, Invalid, ConstructorFailed, Skipped };

std::string_view verdict_name(Verdict v);

struct FunctionRun {
  std::string name;
  std::string kind;  // function, method, constructor, generator, module
  Verdict verdict = Verdict::Ok;
  std::string note;
  std::vector<CaseOutcome> outcomes;
};

struct UniqueCrash {
  std::string attributed_to;
  CrashSignature signature;
  std::size_t count = 0;
  CaseOutcome representative;  // binding already shrunk
  std::size_t shrink_evaluations = 0;
  // How each handle reachable from the representative was built: the
  // handle and the arguments of its construct, innermost first.
  std::vector<std::pair<Value, Binding>> objects;
};

struct CampaignResult {
  std::vector<FunctionRun> runs;
  std::vector<UniqueCrash> crashes;  // in order of discovery
  bool worker_failure = false;       // some target came back invalid
};

// The whole annotation file. `only` restricts to the named blocks and
// module tests. Throws ProtocolError when the worker misbehaves.
CampaignResult run_campaign(const AnnotationSpec& spec, const CampaignConfig& cfg, Session& worker,
                            const std::vector<std::string>& only = {});

// Seed of the generation stream for one block; depends only on the campaign
// seed and the block name.
std::uint64_t block_seed(std::uint64_t campaign_seed, std::string_view name);

}  // namespace ancheck
