#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpmn/estimators.hpp"
#include "bpmn/eval.hpp"
#include "bpmn/selection.hpp"
#include "bpmn/solver.hpp"
#include "bpmn/types.hpp"

namespace bpmn {

// File formats.  All JSON artifacts carry "schema_version"; indices in
// serialized edge/entry lists are 1-based.  Sample CSVs are headerless 0/1
// integers; the other CSVs carry a single header row.

// Thrown on malformed CSV cells; row/col are 1-based.
struct CsvError : ValidationError {
  CsvError(const std::string& what, std::size_t row, std::size_t col)
      : ValidationError(what), row(row), col(col) {}
  std::size_t row;
  std::size_t col;
};

// Strict {0,1} reader.  With impute_zero_missing, empty / NA / ? cells
// become 0; anything else non-binary is rejected either way.
SampleMatrix read_samples_csv(const std::filesystem::path& path,
                              bool impute_zero_missing = false);
void write_samples_csv(const std::filesystem::path& path, const SampleMatrix& x);

// {"schema_version":1,"p":p,"entries":[[s,t,value],...]} with s <= t,
// nonzeros only, 1-based.
nlohmann::json theta_to_json(const ThetaMatrix& theta);
ThetaMatrix theta_from_json(const nlohmann::json& j);
void write_theta_json(const std::filesystem::path& path, const ThetaMatrix& theta);
ThetaMatrix read_theta_json(const std::filesystem::path& path);

// Dense p x p CSV alternative.
void write_theta_csv(const std::filesystem::path& path, const ThetaMatrix& theta);
ThetaMatrix read_theta_csv(const std::filesystem::path& path);

// Full fit report (includes timings) and the deterministic coefficient
// artifact (no timings; byte-identical across reruns with equal seeds).
nlohmann::json fit_report_to_json(const FitReport& report, bool include_timings);
nlohmann::json path_solution_to_json(const PathSolution& path);

nlohmann::json stars_result_to_json(const StarsResult& result);
void write_instability_csv(const std::filesystem::path& path, const StarsResult& r);

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);
void write_bench_csv(const std::filesystem::path& path,
                     const std::vector<BenchRecord>& records);

// Per (method, lambda) medians and spread over the repeats.
void write_bench_summary_csv(const std::filesystem::path& path,
                             const std::vector<BenchRecord>& records);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// FNV-1a 64-bit content hash, 16 hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::filesystem::path& path);

// Run manifest: one per command.  Paths are recorded relative to the output
// directory; outputs carrying wall-clock data are hashed as "-" so the
// manifest itself stays reproducible.
class Manifest {
 public:
  Manifest(std::string command, nlohmann::json config);
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path, bool deterministic = true);
  void write(const std::filesystem::path& path) const;
  nlohmann::json to_json() const;

 private:
  nlohmann::json j_;
};

}  // namespace bpmn
