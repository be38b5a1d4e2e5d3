#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace flagcurv {

struct ReproduceOptions {
  std::uint64_t seed = 1;
  int threads = 1;                // fp_scan workers; results do not depend on it
  std::vector<std::string> tags;  // empty selects every criterion
  std::string cache_dir;          // when set, the algebra check also round-trips the cache
};

struct CriterionOutcome {
  int id = 0;
  std::string tag;
  std::string title;
  bool pass = false;
  // Failing only on a documented disagreement with the reference data.
  bool known_deviation = false;
  std::string summary;
  nlohmann::json detail;
};

struct ReproduceReport {
  std::uint64_t seed = 0;
  std::vector<CriterionOutcome> outcomes;
  bool all_pass() const;
  bool acceptable() const;  // every failure is a known deviation
};

// algebra, oracle, navigation, fp-scan, glued, criterion, determinism.
const std::vector<std::string>& reproduce_tags();

// Runs the selected criteria; the determinism criterion reruns the other
// selected criteria (all of them when it is selected alone) and compares the
// serialized reports byte for byte. Throws ParameterError on unknown tags.
ReproduceReport reproduce(const ReproduceOptions& opt = {});

// Schema-versioned, free of timings and thread counts.
nlohmann::json to_json(const ReproduceReport& r);
std::string to_text(const ReproduceReport& r);

}  // namespace flagcurv
