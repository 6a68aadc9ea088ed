#include "pathnet/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pathnet/io_util.hpp"

namespace pathnet {

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Source: return "source";
        case Phase::Destination: return "destination";
        case Phase::Scratch: return "scratch";
    }
    return "?";
}

Phase phase_from_string(const std::string& s) {
    if (s == "source") return Phase::Source;
    if (s == "destination") return Phase::Destination;
    if (s == "scratch") return Phase::Scratch;
    throw std::invalid_argument("unknown phase \"" + s + "\"");
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Splits one CSV line; only the quoted-field subset we emit is accepted.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (in_quotes) {
        throw std::runtime_error("metrics csv: unterminated quote at line " +
                                 std::to_string(line_no));
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const char* what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("metrics csv: bad ") + what + " \"" + s +
                                 "\" at line " + std::to_string(line_no));
    }
}

long long parse_int(const std::string& s, const char* what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("metrics csv: bad ") + what + " \"" + s +
                                 "\" at line " + std::to_string(line_no));
    }
}

// Seeds use the full unsigned range, so they get their own parser.
std::uint64_t parse_u64(const std::string& s, const char* what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("metrics csv: bad ") + what + " \"" + s +
                                 "\" at line " + std::to_string(line_no));
    }
}

}  // namespace

std::string metrics_csv_header() {
    return "phase,iteration,generation,path_index,genotype,fitness,mean_train_loss,"
           "eval_accuracy,wallclock_ms,seed";
}

std::string metrics_to_csv(const std::vector<MetricsRecord>& records, bool include_wallclock) {
    std::ostringstream os;
    os << metrics_csv_header() << '\n';
    for (const auto& r : records) {
        os << to_string(r.phase) << ',' << r.iteration << ',' << r.generation << ',';
        if (r.path_index) os << *r.path_index;
        os << ',' << '"' << r.genotype << '"' << ',' << fmt_double(r.fitness) << ','
           << fmt_double(r.mean_train_loss) << ',';
        if (r.eval_accuracy) os << fmt_double(*r.eval_accuracy);
        os << ',';
        if (include_wallclock) os << fmt_double(r.wallclock_ms);
        os << ',' << r.seed << '\n';
    }
    return os.str();
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path,
                       bool include_wallclock) {
    write_file_atomic(path, metrics_to_csv(records, include_wallclock));
}

std::vector<MetricsRecord> metrics_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<MetricsRecord> records;

    if (!std::getline(in, line)) throw std::runtime_error("metrics csv: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != metrics_csv_header()) {
        throw std::runtime_error("metrics csv: unexpected header at line 1");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line, line_no);
        if (fields.size() != 10) {
            throw std::runtime_error("metrics csv: expected 10 fields, got " +
                                     std::to_string(fields.size()) + " at line " +
                                     std::to_string(line_no));
        }
        MetricsRecord r;
        try {
            r.phase = phase_from_string(fields[0]);
        } catch (const std::exception&) {
            throw std::runtime_error("metrics csv: bad phase \"" + fields[0] + "\" at line " +
                                     std::to_string(line_no));
        }
        r.iteration = static_cast<int>(parse_int(fields[1], "iteration", line_no));
        r.generation = static_cast<std::size_t>(parse_int(fields[2], "generation", line_no));
        if (!fields[3].empty()) {
            r.path_index = static_cast<int>(parse_int(fields[3], "path_index", line_no));
        }
        r.genotype = fields[4];
        r.fitness = parse_double(fields[5], "fitness", line_no);
        r.mean_train_loss = parse_double(fields[6], "mean_train_loss", line_no);
        if (!fields[7].empty()) {
            r.eval_accuracy = parse_double(fields[7], "eval_accuracy", line_no);
        }
        if (!fields[8].empty()) {
            r.wallclock_ms = parse_double(fields[8], "wallclock_ms", line_no);
        }
        r.seed = parse_u64(fields[9], "seed", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_metrics_csv: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return metrics_from_csv(buf.str());
}

}  // namespace pathnet
