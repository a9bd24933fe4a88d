#include "fairal/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairal/errors.hpp"

namespace fairal {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string format_optional(const std::optional<double>& v) {
    return v.has_value() ? format_double(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError(std::string("results csv: bad ") + what + " value '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError(std::string("results csv: bad ") + what + " value '" + s + "'");
    }
    return v;
}

std::optional<double> parse_optional(const std::string& s, const char* what) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, what);
}

} // namespace

std::string results_row_to_csv(const ResultRow& r) {
    std::ostringstream os;
    os << r.run_id << ',' << r.bias_preset << ',' << r.composition << ',' << r.strategy << ','
       << r.seed << ',' << r.cycle << ',' << r.n_labeled << ',' << format_double(r.dsc_overall)
       << ',' << format_double(r.dsc_g1) << ',' << format_double(r.dsc_g2) << ','
       << format_double(r.delta) << ',' << format_double(r.essp) << ','
       << format_double(r.group1_ratio) << ',' << format_optional(r.weights_g1) << ','
       << format_optional(r.weights_g2) << ',' << r.eval_split;
    return os.str();
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os << kResultsHeader << '\n';
    for (const auto& r : rows) os << results_row_to_csv(r) << '\n';
    if (!os) throw DataError("write failed: " + path.string());
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw DataError("results csv: missing header in " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) {
        throw DataError("results csv: unexpected header in " + path.string());
    }
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 16) {
            throw DataError("results csv: line " + std::to_string(lineno) + " has " +
                            std::to_string(f.size()) + " fields, expected 16");
        }
        ResultRow r;
        r.run_id = f[0];
        r.bias_preset = f[1];
        r.composition = f[2];
        r.strategy = f[3];
        r.seed = parse_u64(f[4], "seed");
        r.cycle = parse_u64(f[5], "cycle");
        r.n_labeled = parse_u64(f[6], "n_labeled");
        r.dsc_overall = parse_double(f[7], "dsc_overall");
        r.dsc_g1 = parse_double(f[8], "dsc_g1");
        r.dsc_g2 = parse_double(f[9], "dsc_g2");
        r.delta = parse_double(f[10], "delta");
        r.essp = parse_double(f[11], "essp");
        r.group1_ratio = parse_double(f[12], "group1_ratio");
        r.weights_g1 = parse_optional(f[13], "weights_g1");
        r.weights_g2 = parse_optional(f[14], "weights_g2");
        r.eval_split = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string score_row_to_csv(const ScoreRow& r) {
    std::ostringstream os;
    os << r.run_id << ',' << r.cycle << ',' << r.case_id << ',' << r.group << ',' << r.strategy
       << ',' << format_double(r.raw_entropy) << ',' << r.region_size << ','
       << format_double(r.weight_applied) << ',' << format_double(r.score) << ','
       << (r.fallback_used ? 1 : 0);
    return os.str();
}

} // namespace fairal
