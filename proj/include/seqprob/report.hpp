#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace seqprob::report {

// One checked quantity: inputs, value, tolerance, pass flag.
struct CheckRecord {
  std::string name;
  nlohmann::json inputs;
  double value = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // e.g. "<", ">", "abs_diff<"
  double reference = 0.0;
  bool pass = false;
};

class Report {
 public:
  // value must be below tol (optionally relative to reference)
  CheckRecord& check_below(const std::string& name, double value, double tol,
                           nlohmann::json inputs = {});
  CheckRecord& check_above(const std::string& name, double value, double threshold,
                           nlohmann::json inputs = {});
  CheckRecord& check_close(const std::string& name, double value, double reference,
                           double tol, nlohmann::json inputs = {});
  CheckRecord& check_true(const std::string& name, bool ok,
                          nlohmann::json inputs = {});

  bool all_pass() const;
  const std::vector<CheckRecord>& records() const { return records_; }
  nlohmann::json to_json() const;

 private:
  std::vector<CheckRecord> records_;
};

}  // namespace seqprob::report
