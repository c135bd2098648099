#include "ingarch/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace ingarch {

namespace {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

std::int64_t parse_int(const std::string& s, int line_no) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    return v;
}

} // namespace

void write_series_csv(std::ostream& os, std::span<const SeriesRecord> series) {
    os << "t,x,v\n";
    for (const auto& r : series)
        os << r.t << ',' << r.x << ',' << fmt_real(r.v) << '\n';
}

std::vector<SeriesRecord> read_series_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("series CSV: empty input");
    if (line == "t,x,v\r") line.pop_back();
    if (line != "t,x,v") throw IoError("series CSV: expected header 't,x,v', got '" + line + "'");
    std::vector<SeriesRecord> out;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw IoError("CSV line " + std::to_string(line_no) + ": expected 3 fields, got " +
                          std::to_string(fields.size()));
        out.push_back({parse_int(fields[0], line_no), parse_int(fields[1], line_no),
                       parse_double(fields[2], line_no)});
    }
    return out;
}

void write_fit_csv(std::ostream& os, const FitResult& fit) {
    const std::size_t p = fit.theta.size() - 1;
    os << "p,omega_hat";
    for (std::size_t i = 1; i <= p; ++i) os << ",alpha_" << i;
    os << ",se_omega";
    for (std::size_t i = 1; i <= p; ++i) os << ",se_" << i;
    os << ",eta_sq,constrained\n";
    os << p;
    for (double v : fit.theta) os << ',' << fmt_real(v);
    for (double v : fit.se) os << ',' << fmt_real(v);
    os << ',' << fmt_real(fit.eta_sq) << ',' << (fit.constrained ? 1 : 0) << '\n';
}

void write_mixing_csv(std::ostream& os, const MixingReport& report) {
    os << "n,analytic,emp_disagree,emp_disagree_se,emp_uncoupled,emp_uncoupled_se\n";
    for (std::size_t i = 0; i < report.n_grid.size(); ++i) {
        os << report.n_grid[i] << ',' << fmt_real(report.analytic_bound[i]) << ','
           << fmt_real(report.emp_disagree[i]) << ',' << fmt_real(report.emp_disagree_se[i]) << ','
           << fmt_real(report.emp_uncoupled[i]) << ',' << fmt_real(report.emp_uncoupled_se[i])
           << '\n';
    }
}

void write_study_csv(std::ostream& os, const StudyResult& result) {
    os << "p,T,omega_mean,omega_se";
    for (int i = 1; i <= result.max_p; ++i)
        os << ",alpha" << i << "_mean,alpha" << i << "_se";
    os << ",success_rate\n";
    for (const auto& c : result.cells) {
        os << c.p << ',' << c.T << ',' << fmt_real(c.mean_theta[0]) << ','
           << fmt_real(c.mean_se[0]);
        for (int i = 1; i <= result.max_p; ++i) {
            if (i <= c.p)
                os << ',' << fmt_real(c.mean_theta[static_cast<std::size_t>(i)]) << ','
                   << fmt_real(c.mean_se[static_cast<std::size_t>(i)]);
            else
                os << ",,";
        }
        os << ',' << fmt_real(c.success_rate) << '\n';
    }
}

} // namespace ingarch
