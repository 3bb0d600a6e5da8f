#include "lmc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace lmc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& path, int line, std::string_view tok) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        fail(path, line, "cannot parse number '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    // tolerate trailing '\r' from CRLF input
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

CorrespondenceSet load_csv(const std::string& path, std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(path, 1, "missing header row");
    const auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "x" || header[1] != "y" || header[2] != "u" ||
        header[3] != "v")
        fail(path, 1, "header must start with x,y,u,v");
    std::size_t col = 4;
    bool has_label = false;
    if (col < header.size() && header[col] == "label") {
        has_label = true;
        ++col;
    }
    const int d0 = static_cast<int>(header.size() - col);
    for (int f = 0; f < d0; ++f)
        if (header[col + f] != "f" + std::to_string(f))
            fail(path, 1, "feature columns must be named f0..f" + std::to_string(d0 - 1));

    CorrespondenceSet set;
    std::vector<std::vector<double>> feats;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto tok = split_csv(line);
        if (tok.size() != header.size())
            fail(path, lineno,
                 "expected " + std::to_string(header.size()) + " columns, got " +
                     std::to_string(tok.size()));
        Correspondence c;
        c.x = parse_double(path, lineno, tok[0]);
        c.y = parse_double(path, lineno, tok[1]);
        c.u = parse_double(path, lineno, tok[2]);
        c.v = parse_double(path, lineno, tok[3]);
        set.items.push_back(c);
        std::size_t next = 4;
        if (has_label) {
            const double lv = parse_double(path, lineno, tok[next++]);
            if (lv != 0.0 && lv != 1.0) fail(path, lineno, "label must be 0 or 1");
            set.labels.push_back(static_cast<int>(lv));
        }
        if (d0 > 0) {
            std::vector<double> row(d0);
            for (int f = 0; f < d0; ++f) row[f] = parse_double(path, lineno, tok[next + f]);
            feats.push_back(std::move(row));
        }
    }
    if (d0 > 0) {
        set.features.resize(static_cast<int>(feats.size()), d0);
        for (std::size_t i = 0; i < feats.size(); ++i)
            for (int f = 0; f < d0; ++f) set.features(static_cast<int>(i), f) = feats[i][f];
    }
    return set;
}

CorrespondenceSet load_jsonl(const std::string& path, std::istream& in) {
    CorrespondenceSet set;
    std::vector<std::vector<double>> feats;
    int d0 = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(path, lineno, e.what());
        }
        if (!obj.is_object()) fail(path, lineno, "expected a JSON object");
        for (const char* key : {"x", "y", "u", "v"})
            if (!obj.contains(key) || !obj[key].is_number())
                fail(path, lineno, std::string("missing numeric key '") + key + "'");
        Correspondence c{obj["x"].get<double>(), obj["y"].get<double>(), obj["u"].get<double>(),
                         obj["v"].get<double>()};
        set.items.push_back(c);
        if (obj.contains("label")) {
            const int lv = obj["label"].get<int>();
            if (lv != 0 && lv != 1) fail(path, lineno, "label must be 0 or 1");
            set.labels.push_back(lv);
        } else if (!set.labels.empty()) {
            fail(path, lineno, "label present on some rows but missing here");
        }
        if (obj.contains("features")) {
            if (!obj["features"].is_array()) fail(path, lineno, "'features' must be an array");
            std::vector<double> row = obj["features"].get<std::vector<double>>();
            if (d0 < 0) d0 = static_cast<int>(row.size());
            if (static_cast<int>(row.size()) != d0)
                fail(path, lineno,
                     "feature length " + std::to_string(row.size()) + " differs from first row (" +
                         std::to_string(d0) + ")");
            feats.push_back(std::move(row));
        } else if (d0 >= 0) {
            fail(path, lineno, "features present on some rows but missing here");
        }
        if (!set.labels.empty() && set.labels.size() != set.items.size())
            fail(path, lineno, "label present on some rows but missing earlier");
    }
    if (d0 > 0) {
        set.features.resize(static_cast<int>(feats.size()), d0);
        for (std::size_t i = 0; i < feats.size(); ++i)
            for (int f = 0; f < d0; ++f) set.features(static_cast<int>(i), f) = feats[i][f];
    }
    return set;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

FileFormat format_from_name(const std::string& name) {
    if (name == "csv") return FileFormat::csv;
    if (name == "jsonl") return FileFormat::jsonl;
    throw std::invalid_argument("unknown format '" + name + "' (expected csv or jsonl)");
}

CorrespondenceSet load_correspondences(const std::string& path, FileFormat format,
                                       const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CorrespondenceSet set =
        format == FileFormat::csv ? load_csv(path, in) : load_jsonl(path, in);
    set.validate(opts.check_range);
    return set;
}

void save_correspondences(const std::string& path, const CorrespondenceSet& set,
                          FileFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const int d0 = set.has_features() ? static_cast<int>(set.features.cols()) : 0;
    if (format == FileFormat::csv) {
        out << "x,y,u,v";
        if (set.has_labels()) out << ",label";
        for (int f = 0; f < d0; ++f) out << ",f" << f;
        out << '\n';
        for (int i = 0; i < set.size(); ++i) {
            const auto& c = set.items[i];
            out << format_double(c.x) << ',' << format_double(c.y) << ',' << format_double(c.u)
                << ',' << format_double(c.v);
            if (set.has_labels()) out << ',' << set.labels[i];
            for (int f = 0; f < d0; ++f) out << ',' << format_double(set.features(i, f));
            out << '\n';
        }
    } else {
        for (int i = 0; i < set.size(); ++i) {
            const auto& c = set.items[i];
            json obj{{"x", c.x}, {"y", c.y}, {"u", c.u}, {"v", c.v}};
            if (set.has_labels()) obj["label"] = set.labels[i];
            if (d0 > 0) {
                std::vector<double> row(d0);
                for (int f = 0; f < d0; ++f) row[f] = set.features(i, f);
                obj["features"] = row;
            }
            out << obj.dump() << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void save_prune_result(const std::string& path, const PruneResult& result, FileFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const int n = static_cast<int>(result.residual_norms.size());
    if (format == FileFormat::csv) {
        out << "index,residual,inlier\n";
        for (int i = 0; i < n; ++i)
            out << i << ',' << format_double(result.residual_norms[i]) << ',' << result.inlier[i]
                << '\n';
    } else {
        for (int i = 0; i < n; ++i) {
            json obj{{"index", i},
                     {"residual", result.residual_norms[i]},
                     {"inlier", result.inlier[i]},
                     {"smoothed", {result.smoothed(i, 0), result.smoothed(i, 1)}}};
            out << obj.dump() << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lmc
