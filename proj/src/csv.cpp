#include "ncs/csv.hpp"

#include <cstdio>
#include <fstream>

namespace ncs {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const FreqResponse& fr) {
    os << "omega_rad_s,re,im,mag_db,phase_deg\n";
    for (std::size_t i = 0; i < fr.grid.size(); ++i) {
        os << format_full(fr.grid.omegas[i]) << ',' << format_full(fr.values[i].real()) << ','
           << format_full(fr.values[i].imag()) << ',' << format_full(fr.mag_db(i)) << ','
           << format_full(fr.phase_deg(i)) << '\n';
    }
}

void write_csv(std::ostream& os, const Trace& tr) {
    for (std::size_t i = 0; i < tr.columns.size(); ++i) {
        if (i) os << ',';
        os << tr.columns[i];
    }
    os << '\n';
    for (const auto& row : tr.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << format_full(row[i]);
        }
        os << '\n';
    }
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    return f;
}

}  // namespace

void write_csv_file(const std::string& path, const FreqResponse& fr) {
    auto f = open_or_throw(path);
    write_csv(f, fr);
}

void write_csv_file(const std::string& path, const Trace& tr) {
    auto f = open_or_throw(path);
    write_csv(f, tr);
}

}  // namespace ncs
