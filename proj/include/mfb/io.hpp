// Field dump format and report serialization.
//
// PFLD dump: 16-byte header (magic "PFLD", u32 n, 8 reserved zero bytes),
// then n*n little-endian IEEE-754 float64 samples, row major.
#pragma once

#include <string>

#include "mfb/diagnostics.hpp"
#include "mfb/grid.hpp"

namespace mfb {

void write_field(const std::string& path, const PeriodicField& f);
PeriodicField read_field(const std::string& path);

// JSON (snake_case keys), written with a trailing newline.
std::string report_json(const SolveReport& r);
std::string sweep_json(const SweepResult& s);
std::string base_json(const BaseState& s);

// CSV table: t, lambda_pred, lambda_meas, rho_t, outer_err + fits footer.
std::string sweep_csv(const SweepResult& s);

void write_text(const std::string& path, const std::string& text);

} // namespace mfb
