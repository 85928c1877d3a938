#include "seqprob/report.hpp"

#include <cmath>

namespace seqprob::report {

CheckRecord& Report::check_below(const std::string& name, double value, double tol,
                                 nlohmann::json inputs) {
  records_.push_back({name, std::move(inputs), value, tol, "<", 0.0, value < tol});
  return records_.back();
}

CheckRecord& Report::check_above(const std::string& name, double value,
                                 double threshold, nlohmann::json inputs) {
  records_.push_back(
      {name, std::move(inputs), value, threshold, ">", 0.0, value > threshold});
  return records_.back();
}

CheckRecord& Report::check_close(const std::string& name, double value,
                                 double reference, double tol,
                                 nlohmann::json inputs) {
  records_.push_back({name, std::move(inputs), value, tol, "abs_diff<", reference,
                      std::abs(value - reference) < tol});
  return records_.back();
}

CheckRecord& Report::check_true(const std::string& name, bool ok,
                                nlohmann::json inputs) {
  records_.push_back(
      {name, std::move(inputs), ok ? 1.0 : 0.0, 0.5, ">", 0.0, ok});
  return records_.back();
}

bool Report::all_pass() const {
  for (const auto& r : records_)
    if (!r.pass) return false;
  return true;
}

nlohmann::json Report::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records_) {
    arr.push_back({{"name", r.name},
                   {"inputs", r.inputs},
                   {"value", r.value},
                   {"tolerance", r.tolerance},
                   {"comparison", r.comparison},
                   {"reference", r.reference},
                   {"pass", r.pass}});
  }
  return arr;
}

}  // namespace seqprob::report
