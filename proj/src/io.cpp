#include "ame/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace ame {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Non-empty, non-comment lines of a CSV file, split into fields.
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    rows.push_back(split_csv(line));
  }
  if (rows.empty()) throw DataError(path.string() + " is empty");
  return rows;
}

bool is_na(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

double parse_number(const std::string& s, const fs::path& path, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw DataError(path.string() + ": non-numeric cell '" + s + "' at line " + std::to_string(row + 1) +
                    ", column " + std::to_string(col + 1));
  return v;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::map<std::string, int> label_index(const std::vector<std::string>& labels) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) idx[labels[i]] = static_cast<int>(i);
  return idx;
}

std::ofstream open_out(const fs::path& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  if (!comment.empty()) out << comment << '\n';
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (data.empty()) throw DataError("no data file given");
  data_kind_from_string(family);
  if (rank < 0) throw DataError("rank must be non-negative");
  if (chains < 1) throw DataError("need at least one chain");
  ChainSettings{iterations, burn_in, thin}.validate();
  if (!seed) throw DataError("a seed is required");
}

nlohmann::json RunConfig::to_json(bool with_output) const {
  nlohmann::json j;
  j["data"] = data;
  j["family"] = family;
  j["frn_max"] = frn_max;
  j["rank"] = rank;
  j["intercept"] = intercept;
  j["row_covariates"] = row_covariates;
  j["col_covariates"] = col_covariates;
  j["dyad_covariates"] = dyad_covariates;
  j["regressors"] = regressors;
  nlohmann::json prior = nlohmann::json::object();
  if (q0_scale) prior["q0_scale"] = *q0_scale;
  if (nu0) prior["nu0"] = *nu0;
  if (sigma02) prior["sigma02"] = *sigma02;
  if (eta0) prior["eta0"] = *eta0;
  if (kappa0) prior["kappa0"] = *kappa0;
  prior["rho_grid"] = rho_grid;
  j["prior"] = prior;
  j["ordinal_within_row"] = ordinal_within_row;
  j["check_constraints"] = check_constraints;
  j["chains"] = chains;
  j["iterations"] = iterations;
  j["burn_in"] = burn_in;
  j["thin"] = thin;
  if (seed) j["seed"] = *seed;
  if (with_output) j["output_dir"] = output_dir;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig c) {
  try {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    take("data", c.data);
    take("family", c.family);
    take("frn_max", c.frn_max);
    take("rank", c.rank);
    take("intercept", c.intercept);
    take("row_covariates", c.row_covariates);
    take("col_covariates", c.col_covariates);
    take("dyad_covariates", c.dyad_covariates);
    take("regressors", c.regressors);
    take("ordinal_within_row", c.ordinal_within_row);
    take("check_constraints", c.check_constraints);
    take("chains", c.chains);
    take("iterations", c.iterations);
    take("burn_in", c.burn_in);
    take("thin", c.thin);
    take("output_dir", c.output_dir);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("prior")) {
      const auto& p = j.at("prior");
      if (p.contains("q0_scale")) c.q0_scale = p.at("q0_scale").get<double>();
      if (p.contains("nu0")) c.nu0 = p.at("nu0").get<double>();
      if (p.contains("sigma02")) c.sigma02 = p.at("sigma02").get<double>();
      if (p.contains("eta0")) c.eta0 = p.at("eta0").get<double>();
      if (p.contains("kappa0")) c.kappa0 = p.at("kappa0").get<double>();
      if (p.contains("rho_grid")) p.at("rho_grid").get_to(c.rho_grid);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad run config: ") + e.what());
  }
  return c;
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance_comment(const std::string& hash, std::uint64_t seed) {
  return "# ame config_hash=" + hash + " seed=" + std::to_string(seed);
}

Sociomatrix load_sociomatrix(const fs::path& path, DataKind kind, int frn_max) {
  const auto rows = read_csv(path);
  const std::vector<std::string>& header = rows.front();
  const std::size_t n = header.size() - 1;
  if (header.size() < 2 || rows.size() != n + 1)
    throw DataError(path.string() + ": expected a square matrix with a label row and column");
  std::vector<std::string> labels(header.begin() + 1, header.end());
  Matrix values = Matrix::Zero(n, n);
  Mask mask = Mask::Constant(n, n, false);
  std::vector<std::string> mismatched;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1)
      throw DataError(path.string() + ": line " + std::to_string(i + 2) + " has " +
                      std::to_string(row.size()) + " fields, expected " + std::to_string(n + 1));
    if (row[0] != labels[i]) mismatched.push_back(row[0] + " vs " + labels[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& cell = row[j + 1];
      if (i == j || is_na(cell)) continue;
      values(i, j) = parse_number(cell, path, i + 1, j + 1);
      mask(i, j) = true;
    }
  }
  if (!mismatched.empty())
    throw DataError(path.string() + ": row labels differ from column labels: " + join(mismatched));
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw DataError(path.string() + ": duplicate node labels");
  return Sociomatrix::make(values, mask, kind, frn_max, labels);
}

void write_sociomatrix(const fs::path& path, const Matrix& values, const Mask& mask,
                       const std::vector<std::string>& labels, const std::string& comment) {
  std::ofstream out = open_out(path, comment);
  const Eigen::Index n = values.rows();
  out << "label";
  for (Eigen::Index j = 0; j < n; ++j) out << ',' << labels[j];
  out << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out << labels[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      out << ',';
      if (i != j && mask(i, j)) {
        out << values(i, j);
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

Matrix load_nodal_covariates(const fs::path& path, const std::vector<std::string>& labels,
                             std::vector<std::string>& names) {
  const auto rows = read_csv(path);
  const auto& header = rows.front();
  if (header.size() < 2) throw DataError(path.string() + ": no covariate columns");
  names.assign(header.begin() + 1, header.end());
  const auto index = label_index(labels);
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix x(n, static_cast<Eigen::Index>(names.size()));
  std::vector<bool> seen(labels.size(), false);
  std::vector<std::string> unknown, missing;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError(path.string() + ": line " + std::to_string(r + 1) + " has the wrong field count");
    const auto it = index.find(row[0]);
    if (it == index.end()) {
      unknown.push_back(row[0]);
      continue;
    }
    if (seen[it->second]) throw DataError(path.string() + ": duplicate row for node " + row[0]);
    seen[it->second] = true;
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (is_na(row[k])) throw DataError(path.string() + ": missing covariate for node " + row[0]);
      x(it->second, static_cast<Eigen::Index>(k - 1)) = parse_number(row[k], path, r, k);
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!seen[i]) missing.push_back(labels[i]);
  if (!unknown.empty() || !missing.empty())
    throw DataError(path.string() + ": label mismatch; unknown: [" + join(unknown) + "], missing: [" +
                    join(missing) + "]");
  return x;
}

std::vector<Matrix> load_dyadic_covariates(const fs::path& path,
                                           const std::vector<std::string>& labels,
                                           std::vector<std::string>& names) {
  const auto rows = read_csv(path);
  const auto& header = rows.front();
  if (header.size() < 3) throw DataError(path.string() + ": expected from,to and covariate columns");
  names.assign(header.begin() + 2, header.end());
  const auto index = label_index(labels);
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::vector<Matrix> slices(names.size(), Matrix::Zero(n, n));
  Mask seen = Mask::Constant(n, n, false);
  std::set<std::string> unknown;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError(path.string() + ": line " + std::to_string(r + 1) + " has the wrong field count");
    const auto from = index.find(row[0]);
    const auto to = index.find(row[1]);
    if (from == index.end()) unknown.insert(row[0]);
    if (to == index.end()) unknown.insert(row[1]);
    if (from == index.end() || to == index.end()) continue;
    const int i = from->second, j = to->second;
    if (seen(i, j)) throw DataError(path.string() + ": duplicate edge " + row[0] + " -> " + row[1]);
    seen(i, j) = true;
    for (std::size_t k = 2; k < row.size(); ++k) {
      if (is_na(row[k]))
        throw DataError(path.string() + ": missing covariate on edge " + row[0] + " -> " + row[1]);
      slices[k - 2](i, j) = parse_number(row[k], path, r, k);
    }
  }
  if (!unknown.empty())
    throw DataError(path.string() + ": unknown labels: " +
                    join(std::vector<std::string>(unknown.begin(), unknown.end())));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && !seen(i, j))
        throw DataError(path.string() + ": missing covariate for pair " + labels[i] + " -> " +
                        labels[j] + "; dyadic covariates must be complete");
  return slices;
}

void write_dyadic_covariates(const fs::path& path, const std::vector<Matrix>& slices,
                             const std::vector<std::string>& names,
                             const std::vector<std::string>& labels, const std::string& comment) {
  std::ofstream out = open_out(path, comment);
  out << "from,to";
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  const auto n = static_cast<Eigen::Index>(labels.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      out << labels[i] << ',' << labels[j];
      for (const Matrix& s : slices) out << ',' << s(i, j);
      out << '\n';
    }
}

DyadicDesign load_design(const RunConfig& config, const std::vector<std::string>& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix row = Matrix::Zero(n, 0), col = Matrix::Zero(n, 0);
  std::vector<Matrix> dyad;
  std::vector<std::string> row_names, col_names, dyad_names;
  if (!config.row_covariates.empty()) {
    row = load_nodal_covariates(config.row_covariates, labels, row_names);
    for (auto& name : row_names) name += ".row";
  }
  if (!config.col_covariates.empty()) {
    col = load_nodal_covariates(config.col_covariates, labels, col_names);
    for (auto& name : col_names) name += ".col";
  }
  if (!config.dyad_covariates.empty())
    dyad = load_dyadic_covariates(config.dyad_covariates, labels, dyad_names);
  if (!config.intercept && row.cols() == 0 && col.cols() == 0 && dyad.empty())
    return DyadicDesign(static_cast<int>(n), {}, {});
  if (row.cols() == 0 && col.cols() == 0 && dyad.empty()) {
    return DyadicDesign(static_cast<int>(n), {Matrix::Ones(n, n)}, {"intercept"});
  }
  DyadicDesign full = build_design(row, col, dyad, config.intercept, row_names, col_names, dyad_names);
  if (config.regressors.empty()) return full;

  std::vector<Matrix> slices;
  std::vector<std::string> names;
  std::vector<std::string> unknown;
  for (const auto& want : config.regressors) {
    const auto& all = full.names();
    const auto it = std::find(all.begin(), all.end(), want);
    if (it == all.end()) {
      unknown.push_back(want);
      continue;
    }
    slices.push_back(full.slice(static_cast<int>(it - all.begin())));
    names.push_back(want);
  }
  if (!unknown.empty()) throw DataError("unknown regressors: " + join(unknown));
  return DyadicDesign(static_cast<int>(n), slices, names);
}

std::vector<std::string> draw_columns(const std::vector<std::string>& regressors, int rank) {
  std::vector<std::string> cols{"chain", "iteration"};
  for (const auto& name : regressors) cols.push_back("beta_" + name);
  for (const char* c : {"Sigma_aa", "Sigma_ab", "Sigma_bb", "sigma2", "rho", "tr_psi_uv"}) cols.push_back(c);
  for (int k = 0; k < 2 * rank; ++k)
    for (int l = k; l < 2 * rank; ++l) cols.push_back("Psi_" + std::to_string(k) + "_" + std::to_string(l));
  return cols;
}

void write_draws(const fs::path& path, const PosteriorSamples& samples, const std::string& comment) {
  std::ofstream out = open_out(path, comment);
  const auto cols = draw_columns(samples.regressors, samples.rank);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const Draw& d : samples.draws) {
    out << d.chain << ',' << d.iteration;
    for (Eigen::Index k = 0; k < d.beta.size(); ++k) out << ',' << d.beta(k);
    out << ',' << d.Sigma(0, 0) << ',' << d.Sigma(0, 1) << ',' << d.Sigma(1, 1) << ',' << d.sigma2 << ','
        << d.rho << ',' << d.tr_psi_uv;
    for (int k = 0; k < 2 * samples.rank; ++k)
      for (int l = k; l < 2 * samples.rank; ++l) out << ',' << d.Psi(k, l);
    out << '\n';
  }
}

void write_effect_draws(const fs::path& path, const PosteriorSamples& samples,
                        const std::string& comment) {
  std::ofstream out = open_out(path, comment);
  out << "chain,iteration,node,a,b";
  for (int k = 0; k < samples.rank; ++k) out << ",u" << k + 1;
  for (int k = 0; k < samples.rank; ++k) out << ",v" << k + 1;
  out << '\n';
  for (const Draw& d : samples.draws) {
    for (Eigen::Index i = 0; i < d.a.size(); ++i) {
      out << d.chain << ',' << d.iteration << ',' << i << ',' << d.a(i) << ',' << d.b(i);
      for (int k = 0; k < samples.rank; ++k) out << ',' << d.U(i, k);
      for (int k = 0; k < samples.rank; ++k) out << ',' << d.V(i, k);
      out << '\n';
    }
  }
}

PosteriorSamples load_posterior_samples(const fs::path& draws_path, const fs::path& effects_path,
                                        DataKind kind, int rank, int n,
                                        const std::vector<std::string>& regressors) {
  PosteriorSamples s;
  s.kind = kind;
  s.rank = rank;
  s.regressors = regressors;
  const int p = static_cast<int>(regressors.size());

  const auto rows = read_csv(draws_path);
  if (rows.front() != draw_columns(regressors, rank))
    throw DataError(draws_path.string() + ": columns do not match the draw schema");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows.front().size())
      throw DataError(draws_path.string() + ": line " + std::to_string(r + 1) + " is truncated");
    std::size_t c = 0;
    auto next = [&] {
      const double v = parse_number(row[c], draws_path, r, c);
      ++c;
      return v;
    };
    Draw d;
    d.chain = static_cast<int>(next());
    d.iteration = static_cast<long>(next());
    d.beta.resize(p);
    for (int k = 0; k < p; ++k) d.beta(k) = next();
    d.Sigma(0, 0) = next();
    d.Sigma(0, 1) = d.Sigma(1, 0) = next();
    d.Sigma(1, 1) = next();
    d.sigma2 = next();
    d.rho = next();
    d.tr_psi_uv = next();
    d.Psi = Matrix::Zero(2 * rank, 2 * rank);
    for (int k = 0; k < 2 * rank; ++k)
      for (int l = k; l < 2 * rank; ++l) d.Psi(k, l) = d.Psi(l, k) = next();
    d.a = Vector::Zero(n);
    d.b = Vector::Zero(n);
    d.U = Matrix::Zero(n, rank);
    d.V = Matrix::Zero(n, rank);
    s.draws.push_back(std::move(d));
  }

  const auto effects = read_csv(effects_path);
  if (effects.front().size() != static_cast<std::size_t>(5 + 2 * rank))
    throw DataError(effects_path.string() + ": columns do not match the effect schema");
  if (effects.size() - 1 != s.draws.size() * static_cast<std::size_t>(n))
    throw DataError(effects_path.string() + ": row count does not match the draw file");
  for (std::size_t r = 1; r < effects.size(); ++r) {
    const auto& row = effects[r];
    Draw& d = s.draws[(r - 1) / n];
    const auto i = static_cast<Eigen::Index>(parse_number(row[2], effects_path, r, 2));
    if (i != static_cast<Eigen::Index>((r - 1) % n) ||
        static_cast<long>(parse_number(row[1], effects_path, r, 1)) != d.iteration)
      throw DataError(effects_path.string() + ": rows out of order at line " + std::to_string(r + 1));
    d.a(i) = parse_number(row[3], effects_path, r, 3);
    d.b(i) = parse_number(row[4], effects_path, r, 4);
    for (int k = 0; k < rank; ++k) {
      d.U(i, k) = parse_number(row[5 + k], effects_path, r, 5 + k);
      d.V(i, k) = parse_number(row[5 + rank + k], effects_path, r, 5 + rank + k);
    }
  }
  s.uv_sum = Matrix::Zero(n, n);
  if (rank > 0) {
    for (const Draw& d : s.draws) s.uv_sum += d.U * d.V.transpose();
    s.uv_count = static_cast<long>(s.draws.size());
  }
  return s;
}

namespace {

SummaryRow summarize(const std::string& name, const std::vector<double>& x) {
  SummaryRow row;
  row.name = name;
  const double m = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  row.mean = sum / m;
  double ss = 0.0;
  for (double v : x) ss += (v - row.mean) * (v - row.mean);
  row.sd = x.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  row.t_ratio = row.sd > 0.0 ? row.mean / row.sd : 0.0;
  return row;
}

}  // namespace

std::vector<SummaryRow> regression_summary(const PosteriorSamples& samples) {
  if (samples.draws.empty()) throw DataError("no stored draws to summarize");
  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < samples.regressors.size(); ++k)
    rows.push_back(summarize(samples.regressors[k], samples.beta_trace(static_cast<int>(k))));
  return rows;
}

std::vector<SummaryRow> variance_summary(const PosteriorSamples& samples) {
  if (samples.draws.empty()) throw DataError("no stored draws to summarize");
  std::vector<double> saa, sab, sbb, s2, rho, tr;
  for (const Draw& d : samples.draws) {
    saa.push_back(d.Sigma(0, 0));
    sab.push_back(d.Sigma(0, 1));
    sbb.push_back(d.Sigma(1, 1));
    s2.push_back(d.sigma2);
    rho.push_back(d.rho);
    tr.push_back(d.tr_psi_uv);
  }
  std::vector<SummaryRow> rows{summarize("Sigma_aa", saa), summarize("Sigma_ab", sab),
                               summarize("Sigma_bb", sbb), summarize("sigma2", s2),
                               summarize("rho", rho)};
  if (samples.rank > 0) rows.push_back(summarize("tr_psi_uv", tr));
  return rows;
}

void write_summary(const fs::path& path, const std::vector<SummaryRow>& rows,
                   const std::string& comment) {
  std::ofstream out = open_out(path, comment);
  out << "name,mean,sd,t_ratio\n";
  for (const auto& r : rows) out << r.name << ',' << r.mean << ',' << r.sd << ',' << r.t_ratio << '\n';
}

void write_factors(const fs::path& path, const Matrix& uv_mean, int rank,
                   const std::vector<std::string>& labels, const std::string& comment) {
  Eigen::JacobiSVD<Matrix> svd(uv_mean, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector root = svd.singularValues().head(rank).cwiseSqrt();
  const Matrix U = svd.matrixU().leftCols(rank) * root.asDiagonal();
  const Matrix V = svd.matrixV().leftCols(rank) * root.asDiagonal();
  std::ofstream out = open_out(path, comment);
  out << "label";
  for (int k = 0; k < rank; ++k) out << ",u" << k + 1;
  for (int k = 0; k < rank; ++k) out << ",v" << k + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < uv_mean.rows(); ++i) {
    out << labels[i];
    for (int k = 0; k < rank; ++k) out << ',' << U(i, k);
    for (int k = 0; k < rank; ++k) out << ',' << V(i, k);
    out << '\n';
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".ame.lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) throw DataError("output directory " + dir.string() + " is locked by another run (" +
                          path_.string() + ")");
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace ame
