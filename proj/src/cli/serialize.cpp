#include "srf/cli/serialize.hpp"

#include "srf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace srf::cli {

using nlohmann::json;

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

// Column accessors in csv_columns() order; dim_hol is the only integer.
double* column(DiagnosticsRow& r, std::size_t k) {
  double* cols[] = {&r.t,      &r.Y,         &r.W,     &r.Z,       &r.a,        &r.vol,     &r.R_mean,
                    &r.R_min,  &r.R_max,     &r.osc_u, &r.grad_u_max, &r.fut,  &r.mabuchi, &r.nu,
                    &r.lambda_lo, &r.lambda_hi, &r.diam_T, nullptr, &r.shi_m1, &r.shi_m2, &r.equiv_int};
  return cols[k];
}

constexpr std::size_t kDimHolColumn = 17;

json array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "t",     "Y",          "W",   "Z",       "a",  "vol",       "R_mean",    "R_min",  "R_max",   "osc_u", "grad_u_max",
      "fut",   "mabuchi",    "nu",  "lambda_lo", "lambda_hi", "diam_T", "dim_hol", "shi_m1", "shi_m2", "equiv_int"};
  return cols;
}

void write_csv(std::ostream& os, std::span<const DiagnosticsRow> rows) {
  const auto& cols = csv_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << '\n';
  for (DiagnosticsRow r : rows) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (k) os << ',';
      if (k == kDimHolColumn) os << r.dim_hol;
      else put(os, *column(r, k));
    }
    os << '\n';
  }
}

std::vector<DiagnosticsRow> read_csv(std::istream& is) {
  const auto& cols = csv_columns();
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("diagnostics table is empty");
  {
    std::stringstream hs(line);
    std::string name;
    for (const auto& c : cols)
      if (!std::getline(hs, name, ',') || name != c) throw ConfigError("diagnostics table header mismatch at '" + c + "'");
  }
  std::vector<DiagnosticsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    DiagnosticsRow r;
    std::string cell;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (!std::getline(ls, cell, ',')) throw ConfigError("diagnostics row has too few columns");
      if (k == kDimHolColumn) r.dim_hol = std::stoi(cell);
      else *column(r, k) = std::strtod(cell.c_str(), nullptr);
    }
    rows.push_back(r);
  }
  return rows;
}

void write_snapshots(std::ostream& os, const Trajectory& traj) {
  const double kappa = traj.bg->kappa;
  for (const FlowSample& s : traj.samples) {
    const json j{{"t", s.t},           {"phi", array(s.phi(kappa).values())},
                 {"psi", array(s.psi.values())},
                 {"offset", s.offset(kappa)}, {"M", s.M}, {"mu0", s.mu0}, {"sigma", s.sigma}};
    os << j.dump() << '\n';
  }
}

std::vector<Snapshot> read_snapshots(std::istream& is) {
  std::vector<Snapshot> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Snapshot s;
    s.t = j.at("t").get<double>();
    s.phi = j.at("phi").get<std::vector<double>>();
    s.psi = j.at("psi").get<std::vector<double>>();
    s.offset = j.at("offset").get<double>();
    s.M = j.at("M").get<double>();
    s.mu0 = j.at("mu0").get<double>();
    s.sigma = j.at("sigma").get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

void write_json(const std::string& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace srf::cli
