#pragma once

// Artifact formats: diagnostics CSV (fixed column order), JSON-lines snapshots
// and single-document JSON reports. Doubles are written with 17 significant
// digits so every artifact round-trips exactly.

#include "srf/trajectory.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace srf::cli {

const std::vector<std::string>& csv_columns();

void write_csv(std::ostream& os, std::span<const DiagnosticsRow> rows);

/// Parses a table written by write_csv (public columns only).
std::vector<DiagnosticsRow> read_csv(std::istream& is);

/// One object per sample: t, phi (nodal values), psi, offset, M, mu0, sigma.
/// phi = psi + offset; psi alone determines the geometry.
void write_snapshots(std::ostream& os, const Trajectory& traj);

struct Snapshot {
  double t = 0.0;
  std::vector<double> phi, psi;
  double offset = 0.0, M = 0.0, mu0 = 0.0, sigma = 0.0;
};

std::vector<Snapshot> read_snapshots(std::istream& is);

/// Non-finite doubles become the strings "inf", "-inf" or "nan".
nlohmann::json number(double v);

void write_json(const std::string& path, const nlohmann::json& doc);
void write_text(const std::string& path, const std::string& text);

}  // namespace srf::cli
