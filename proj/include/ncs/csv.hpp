#pragma once

#include <ostream>
#include <string>

#include "ncs/frequency.hpp"
#include "ncs/simulate.hpp"

namespace ncs {

//! Full-precision number formatting (17 significant digits round-trips
//! doubles exactly).
std::string format_full(double v);

//! Columns: omega_rad_s, re, im, mag_db, phase_deg.
void write_csv(std::ostream& os, const FreqResponse& fr);

void write_csv(std::ostream& os, const Trace& tr);

void write_csv_file(const std::string& path, const FreqResponse& fr);
void write_csv_file(const std::string& path, const Trace& tr);

}  // namespace ncs
