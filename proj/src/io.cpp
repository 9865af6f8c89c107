#include "bpmn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bpmn/transform.hpp"
#include "bpmn/version.hpp"

namespace bpmn {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool is_missing_token(const std::string& t) {
  return t.empty() || t == "NA" || t == "na" || t == "?";
}

}  // namespace

SampleMatrix read_samples_csv(const std::filesystem::path& path,
                              bool impute_zero_missing) {
  std::ifstream in = open_input(path);
  std::vector<std::uint8_t> values;
  std::size_t n = 0;
  std::size_t p = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++n;
    std::stringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      ++col;
      const std::string token = trim(cell);
      if (is_missing_token(token)) {
        if (!impute_zero_missing) {
          throw CsvError("missing value at row " + std::to_string(n) + ", column " +
                             std::to_string(col) + " (use --impute-zero to map to 0)",
                         n, col);
        }
        values.push_back(0);
      } else if (token == "0") {
        values.push_back(0);
      } else if (token == "1") {
        values.push_back(1);
      } else {
        throw CsvError("non-binary value '" + token + "' at row " +
                           std::to_string(n) + ", column " + std::to_string(col),
                       n, col);
      }
    }
    if (p == 0) {
      p = col;
    } else if (col != p) {
      throw CsvError("ragged row " + std::to_string(n) + ": expected " +
                         std::to_string(p) + " columns, got " + std::to_string(col),
                     n, col);
    }
  }
  if (n == 0 || p == 0) throw ValidationError("empty sample CSV: " + path.string());
  return SampleMatrix(n, p, std::move(values));
}

void write_samples_csv(const std::filesystem::path& path, const SampleMatrix& x) {
  std::ofstream out = open_output(path);
  for (std::size_t i = 0; i < x.n(); ++i) {
    for (std::size_t j = 0; j < x.p(); ++j) {
      out << static_cast<int>(x(i, j));
      out << (j + 1 == x.p() ? '\n' : ',');
    }
  }
}

nlohmann::json theta_to_json(const ThetaMatrix& theta) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t s = 0; s < theta.p(); ++s) {
    for (std::size_t t = s; t < theta.p(); ++t) {
      if (theta(s, t) != 0.0) {
        entries.push_back({s + 1, t + 1, theta(s, t)});
      }
    }
  }
  return {{"schema_version", kSchemaVersion},
          {"p", theta.p()},
          {"entries", std::move(entries)}};
}

ThetaMatrix theta_from_json(const nlohmann::json& j) {
  const auto p = j.at("p").get<std::size_t>();
  ThetaMatrix theta(p);
  for (const auto& entry : j.at("entries")) {
    const auto s = entry.at(0).get<std::size_t>();
    const auto t = entry.at(1).get<std::size_t>();
    if (s < 1 || t < 1 || s > p || t > p) {
      throw ValidationError("theta entry index out of range");
    }
    theta.set(s - 1, t - 1, entry.at(2).get<double>());
  }
  return theta;
}

void write_theta_json(const std::filesystem::path& path, const ThetaMatrix& theta) {
  write_json(path, theta_to_json(theta));
}

ThetaMatrix read_theta_json(const std::filesystem::path& path) {
  return theta_from_json(read_json(path));
}

void write_theta_csv(const std::filesystem::path& path, const ThetaMatrix& theta) {
  std::ofstream out = open_output(path);
  out.precision(17);
  for (std::size_t s = 0; s < theta.p(); ++s) {
    for (std::size_t t = 0; t < theta.p(); ++t) {
      out << theta(s, t);
      out << (t + 1 == theta.p() ? '\n' : ',');
    }
  }
}

ThetaMatrix read_theta_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        row.push_back(std::stod(trim(cell)));
      } catch (const std::exception&) {
        throw CsvError("bad number at row " + std::to_string(line_no) +
                           ", column " + std::to_string(col),
                       line_no, col);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("empty theta CSV: " + path.string());
  const std::size_t p = rows.size();
  std::vector<double> dense;
  dense.reserve(p * p);
  for (const auto& row : rows) {
    if (row.size() != p) throw ValidationError("theta CSV must be square");
    dense.insert(dense.end(), row.begin(), row.end());
  }
  return ThetaMatrix(p, std::move(dense));
}

namespace {

nlohmann::json edges_json(const ThetaMatrix& theta) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t s = 0; s < theta.p(); ++s) {
    for (std::size_t t = s + 1; t < theta.p(); ++t) {
      if (theta(s, t) != 0.0) edges.push_back({s + 1, t + 1, theta(s, t)});
    }
  }
  return edges;
}

}  // namespace

nlohmann::json fit_report_to_json(const FitReport& report, bool include_timings) {
  nlohmann::json per_lambda = nlohmann::json::array();
  for (std::size_t i = 0; i < report.lambdas.size(); ++i) {
    const ThetaMatrix& est = report.estimates[i];
    nlohmann::json diagonal = nlohmann::json::array();
    for (std::size_t s = 0; s < est.p(); ++s) diagonal.push_back(est(s, s));
    nlohmann::json entry{
        {"lambda", report.lambdas[i].lambda},
        {"lambda_internal", report.lambdas[i].lambda_internal},
        {"lambda_pl", report.lambdas[i].lambda_pl},
        {"edges", edges_json(est)},
        {"diagonal", std::move(diagonal)},
        {"objective",
         {{"loglik_part", report.objective[i].loglik_part},
          {"penalty_part", report.objective[i].penalty_part},
          {"total", report.objective[i].total}}},
        {"outer_iterations", report.outer_iterations[i]},
        {"sweeps", report.sweeps[i]},
        {"kkt_max_violation", report.kkt_max_violation[i]},
        {"converged", static_cast<bool>(report.converged[i])}};
    if (!report.asymmetry.empty()) entry["asymmetry"] = report.asymmetry[i];
    if (include_timings) entry["wall_time_ns"] = report.wall_time_ns[i];
    per_lambda.push_back(std::move(entry));
  }
  return {{"schema_version", kSchemaVersion},
          {"method", method_name(report.method)},
          {"p", report.estimates.empty() ? 0 : report.estimates.front().p()},
          {"fits", std::move(per_lambda)},
          {"warnings", report.warnings}};
}

nlohmann::json path_solution_to_json(const PathSolution& path) {
  nlohmann::json fits = nlohmann::json::array();
  for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
    nlohmann::json nonzeros = nlohmann::json::array();
    for (std::size_t j = 0; j < path.coefficients[i].size(); ++j) {
      if (path.coefficients[i][j] != 0.0) {
        nonzeros.push_back({j + 1, path.coefficients[i][j]});
      }
    }
    const SolveDiagnostics& d = path.diagnostics[i];
    fits.push_back({{"lambda", path.lambdas[i]},
                    {"coefficients", std::move(nonzeros)},
                    {"outer_iterations", d.outer_iterations},
                    {"sweeps", d.sweeps},
                    {"kkt_max_violation", d.kkt_max_violation},
                    {"screened_out", d.screened_out},
                    {"kkt_readded", d.kkt_readded},
                    {"converged", d.converged}});
  }
  return {{"schema_version", kSchemaVersion},
          {"n_features", path.n_features},
          {"fits", std::move(fits)}};
}

nlohmann::json stars_result_to_json(const StarsResult& result) {
  return {{"schema_version", kSchemaVersion},
          {"selected_lambda", result.selected_lambda},
          {"selected_lambda_internal", result.selected_lambda_internal},
          {"selected_index", result.selected_index},
          {"selected_lambda_nlr", half_lambda_translate(result.selected_lambda)}};
}

void write_instability_csv(const std::filesystem::path& path, const StarsResult& r) {
  std::ofstream out = open_output(path);
  out.precision(17);
  out << "lambda,instability,instability_monotone,mean_edge_count\n";
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    out << r.lambdas[i] << ',' << r.instability[i] << ','
        << r.instability_monotone[i] << ',' << r.mean_edge_count[i] << '\n';
  }
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ofstream out = open_output(path);
  out.precision(17);
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
    out << curve.thresholds[i] << ',' << curve.fpr[i] << ',' << curve.tpr[i] << '\n';
  }
}

void write_bench_csv(const std::filesystem::path& path,
                     const std::vector<BenchRecord>& records) {
  std::ofstream out = open_output(path);
  out.precision(17);
  out << "method,p,edge_prob,lambda,trial_seed,repeat,wall_time_ns,converged,"
         "iterations\n";
  for (const BenchRecord& r : records) {
    out << method_name(r.method) << ',' << r.p << ',' << r.edge_prob << ','
        << r.lambda << ',' << r.trial_seed << ',' << r.repeat << ','
        << r.wall_time_ns << ',' << (r.converged ? 1 : 0) << ',' << r.iterations
        << '\n';
  }
}

void write_bench_summary_csv(const std::filesystem::path& path,
                             const std::vector<BenchRecord>& records) {
  // records arrive grouped by method with a fixed lambda order per repeat
  struct Key {
    Method method;
    double lambda;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> keys;
  std::vector<std::vector<double>> times;
  std::vector<const BenchRecord*> first;
  for (const BenchRecord& r : records) {
    const Key key{r.method, r.lambda};
    std::size_t slot = keys.size();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == key) {
        slot = i;
        break;
      }
    }
    if (slot == keys.size()) {
      keys.push_back(key);
      times.emplace_back();
      first.push_back(&r);
    }
    times[slot].push_back(static_cast<double>(r.wall_time_ns));
  }
  std::ofstream out = open_output(path);
  out.precision(17);
  out << "method,p,edge_prob,lambda,median_ns,min_ns,max_ns,iterations,"
         "converged\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto sorted = times[i];
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted.size() % 2 == 1
                           ? sorted[sorted.size() / 2]
                           : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                    sorted[sorted.size() / 2]);
    out << method_name(keys[i].method) << ',' << first[i]->p << ','
        << first[i]->edge_prob << ',' << keys[i].lambda << ',' << med << ','
        << sorted.front() << ',' << sorted.back() << ',' << first[i]->iterations
        << ',' << (first[i]->converged ? 1 : 0) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  nlohmann::json j;
  in >> j;
  return j;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot hash " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64_hex(ss.str());
}

Manifest::Manifest(std::string command, nlohmann::json config) {
  j_ = {{"schema_version", kSchemaVersion},
        {"tool_version", kVersion},
        {"command", std::move(command)},
        {"config", std::move(config)},
        {"inputs", nlohmann::json::array()},
        {"outputs", nlohmann::json::array()}};
}

void Manifest::add_input(const std::filesystem::path& path) {
  j_["inputs"].push_back(
      {{"path", path.filename().string()}, {"hash", hash_file(path)}});
}

void Manifest::add_output(const std::filesystem::path& path, bool deterministic) {
  j_["outputs"].push_back(
      {{"path", path.filename().string()},
       {"hash", deterministic ? hash_file(path) : std::string("-")}});
}

void Manifest::write(const std::filesystem::path& path) const {
  write_json(path, j_);
}

nlohmann::json Manifest::to_json() const { return j_; }

}  // namespace bpmn
