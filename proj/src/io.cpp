#include "dfscavity/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace dfscavity {

std::string format_number(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, 17);
    if (ec != std::errc())
        throw DiagnosticsError("format_number: to_chars failed");
    return std::string(buf, ptr);
}

namespace {

double parse_double(std::string_view s, const std::string& context) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError(context + ": cannot parse number '" + std::string(s) + "'");
    return x;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

void SweepResult::validate() const {
    std::map<std::string, double> last;
    for (const auto& row : rows) {
        if (!std::isfinite(row.T) || !std::isfinite(row.value))
            throw ValidationError("SweepResult: non-finite entry");
        if (row.value < 0.0 || row.value > 1.0) {
            std::ostringstream os;
            os << "SweepResult: value " << row.value << " outside [0, 1] (tag '" << row.tag
               << "')";
            throw ValidationError(os.str());
        }
        auto it = last.find(row.tag);
        if (it != last.end() && !(row.T > it->second)) {
            std::ostringstream os;
            os << "SweepResult: T not strictly increasing within tag '" << row.tag << "'";
            throw ValidationError(os.str());
        }
        last[row.tag] = row.T;
    }
}

std::vector<std::string> SweepResult::tags() const {
    std::vector<std::string> out;
    for (const auto& row : rows)
        if (std::find(out.begin(), out.end(), row.tag) == out.end())
            out.push_back(row.tag);
    return out;
}

SweepResult SweepResult::filter(const std::string& tag) const {
    SweepResult out;
    out.metadata = metadata;
    for (const auto& row : rows)
        if (row.tag == tag)
            out.rows.push_back(row);
    return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
    sweep.validate();
    for (const auto& [key, value] : sweep.metadata)
        out << "# " << key << " = " << value << "\n";
    out << "T,value,tag\n";
    for (const auto& row : sweep.rows)
        out << format_number(row.T) << ',' << format_number(row.value) << ',' << row.tag
            << "\n";
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ValidationError("cannot open '" + path + "' for writing");
    write_sweep_csv(sweep, f);
    if (!f.good())
        throw ValidationError("write to '" + path + "' failed");
}

SweepResult read_sweep_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ValidationError("cannot open '" + path + "' for reading");
    SweepResult sweep;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos)
                sweep.metadata.emplace_back(trim(line.substr(1, eq - 1)),
                                            trim(line.substr(eq + 1)));
            continue;
        }
        if (!header_seen) {
            if (line != "T,value,tag")
                throw ValidationError(path + ": expected header 'T,value,tag', got '" +
                                      line + "'");
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw ValidationError(path + ": expected 3 fields, got '" + line + "'");
        sweep.rows.push_back(SweepRow{parse_double(fields[0], path),
                                      parse_double(fields[1], path), fields[2]});
    }
    if (!header_seen)
        throw ValidationError(path + ": no header line found");
    sweep.validate();
    return sweep;
}

void write_table_csv(const std::vector<std::pair<std::string, std::string>>& metadata,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, std::ostream& out) {
    for (const auto& [key, value] : metadata)
        out << "# " << key << " = " << value << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw ValidationError("write_table_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_number(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

void write_table_csv(const std::vector<std::pair<std::string, std::string>>& metadata,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ValidationError("cannot open '" + path + "' for writing");
    write_table_csv(metadata, columns, rows, f);
    if (!f.good())
        throw ValidationError("write to '" + path + "' failed");
}

OverlayDataset load_overlay_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ValidationError("cannot open '" + path + "' for reading");
    OverlayDataset data;
    bool width_known = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        // Tolerate one textual header row.
        if (!width_known && !fields.empty() &&
            fields[0].find_first_not_of("+-.0123456789eE \t") != std::string::npos)
            continue;
        std::ostringstream ctx;
        ctx << path << ":" << lineno;
        if (fields.size() != 2 && fields.size() != 3)
            throw ValidationError(ctx.str() + ": expected 'T,pe[,sigma]'");
        bool with_sigma = fields.size() == 3;
        if (!width_known) {
            data.has_sigma = with_sigma;
            width_known = true;
        } else if (with_sigma != data.has_sigma) {
            throw ValidationError(ctx.str() + ": inconsistent sigma column");
        }
        OverlayPoint pt;
        pt.T = parse_double(trim(fields[0]), ctx.str());
        pt.pe = parse_double(trim(fields[1]), ctx.str());
        if (pt.pe < 0.0 || pt.pe > 1.0)
            throw ValidationError(ctx.str() + ": pe outside [0, 1]");
        if (with_sigma) {
            pt.sigma = parse_double(trim(fields[2]), ctx.str());
            if (!(pt.sigma > 0.0))
                throw ValidationError(ctx.str() + ": sigma must be > 0");
        }
        data.points.push_back(pt);
    }
    if (data.points.empty())
        throw ValidationError(path + ": no data points");
    return data;
}

namespace {

double interpolate(const std::vector<SweepRow>& rows, double T) {
    if (T < rows.front().T || T > rows.back().T) {
        std::ostringstream os;
        os << "shifted time " << T << " outside model range [" << rows.front().T << ", "
           << rows.back().T << "]";
        throw ValidationError(os.str());
    }
    auto it = std::lower_bound(rows.begin(), rows.end(), T,
                               [](const SweepRow& r, double t) { return r.T < t; });
    if (it == rows.begin()) return it->value;
    auto prev = std::prev(it);
    double w = (T - prev->T) / (it->T - prev->T);
    return prev->value + w * (it->value - prev->value);
}

} // namespace

ResidualReport residuals(const SweepResult& sweep, const OverlayDataset& overlay,
                         double phase_offset) {
    if (sweep.rows.empty())
        throw ValidationError("residuals: empty model sweep");
    if (sweep.tags().size() != 1)
        throw ValidationError("residuals: sweep holds several curves, filter one tag first");
    sweep.validate();

    ResidualReport report;
    report.phase_offset = phase_offset;
    double sum_sq = 0.0;
    double chi = 0.0;
    for (const auto& pt : overlay.points) {
        double model = interpolate(sweep.rows, pt.T + phase_offset);
        double res = pt.pe - model;
        report.residuals.push_back(res);
        sum_sq += res * res;
        if (overlay.has_sigma)
            chi += (res / pt.sigma) * (res / pt.sigma);
    }
    report.rms = std::sqrt(sum_sq / static_cast<double>(overlay.points.size()));
    report.chi_square = overlay.has_sigma ? chi : std::numeric_limits<double>::quiet_NaN();
    return report;
}

double fit_phase_offset(const SweepResult& sweep, const OverlayDataset& overlay,
                        double lo, double hi) {
    if (!(hi > lo))
        throw ValidationError("fit_phase_offset: needs hi > lo");
    auto rms = [&](double off) { return residuals(sweep, overlay, off).rms; };
    constexpr int kScan = 128;
    double best = lo, best_val = rms(lo);
    for (int i = 1; i <= kScan; ++i) {
        double off = lo + (hi - lo) * i / kScan;
        double val = rms(off);
        if (val < best_val) {
            best_val = val;
            best = off;
        }
    }
    double a = std::max(lo, best - (hi - lo) / kScan);
    double b = std::min(hi, best + (hi - lo) / kScan);
    constexpr double kGolden = 0.618033988749895;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = rms(x1), f2 = rms(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 > f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + kGolden * (b - a); f2 = rms(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - kGolden * (b - a); f1 = rms(x1);
        }
    }
    return 0.5 * (a + b);
}

namespace {

using nlohmann::json;

class ConfigReader {
public:
    explicit ConfigReader(const json& root) : root_(root) {}

    double number(const char* key, bool required, double fallback,
                  std::vector<std::string>& errs) {
        if (!root_.contains(key)) {
            if (required) errs.push_back(std::string("$.") + key + ": required");
            return fallback;
        }
        const json& v = root_.at(key);
        if (!v.is_number()) {
            errs.push_back(std::string("$.") + key + ": must be a number");
            return fallback;
        }
        return v.get<double>();
    }

    const json& root() const { return root_; }

private:
    const json& root_;
};

} // namespace

RunConfig load_config(const std::string& path, bool strict_keys,
                      std::vector<std::string>* warnings) {
    std::ifstream f(path);
    if (!f)
        throw ValidationError("cannot open config '" + path + "'");
    json root;
    try {
        root = json::parse(f, nullptr, true, true); // allow // comments
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "': " + e.what());
    }

    std::vector<std::string> errs;
    auto unknown_key = [&](const std::string& where) {
        if (strict_keys)
            errs.push_back(where + ": unknown key");
        else if (warnings)
            warnings->push_back(where + ": unknown key (ignored)");
    };
    if (!root.is_object())
        throw ValidationError("config '" + path + "': top level must be an object");

    static const std::vector<std::string> known = {
        "delta", "Omega", "Tr_a", "Tr_b", "nbar", "reduction", "T_grid",
        "rates", "n_trunc", "phase_offset", "model"};
    for (const auto& [key, _] : root.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            unknown_key("$." + key);

    ConfigReader r(root);
    RunConfig cfg;
    cfg.experiment.delta = r.number("delta", true, 0.0, errs);
    cfg.experiment.Omega = r.number("Omega", true, 1.0, errs);
    cfg.experiment.Tr_a = r.number("Tr_a", true, 1.0, errs);
    cfg.experiment.Tr_b = r.number("Tr_b", true, 1.0, errs);
    cfg.experiment.nbar = r.number("nbar", false, 0.0, errs);
    cfg.experiment.reduction = r.number("reduction", false, 1.0, errs);
    cfg.directives.phase_offset = r.number("phase_offset", false, 0.0, errs);

    if (cfg.experiment.Omega <= 0.0) errs.push_back("$.Omega: must be > 0");
    if (cfg.experiment.Tr_a <= 0.0) errs.push_back("$.Tr_a: must be > 0");
    if (cfg.experiment.Tr_b <= 0.0) errs.push_back("$.Tr_b: must be > 0");
    if (cfg.experiment.nbar < 0.0) errs.push_back("$.nbar: must be >= 0");
    if (cfg.experiment.reduction < 0.0 || cfg.experiment.reduction > 1.0)
        errs.push_back("$.reduction: must lie in [0, 1]");

    if (root.contains("n_trunc")) {
        const json& v = root.at("n_trunc");
        if (!v.is_number_integer() || v.get<long>() < 1)
            errs.push_back("$.n_trunc: must be an integer >= 1");
        else
            cfg.directives.n_trunc = v.get<int>();
    }
    if (root.contains("model")) {
        const json& v = root.at("model");
        static const std::vector<std::string> models = {"ideal", "diagonal", "general",
                                                        "protocol"};
        if (!v.is_string() ||
            std::find(models.begin(), models.end(), v.get<std::string>()) == models.end())
            errs.push_back("$.model: must be one of ideal, diagonal, general, protocol");
        else
            cfg.directives.model = v.get<std::string>();
    }

    // Rates: diagonals always derive from the measured decay times.
    double k11 = 0.0, k22 = 0.0;
    if (cfg.experiment.Tr_a > 0.0 && cfg.experiment.Tr_b > 0.0 &&
        cfg.experiment.nbar >= 0.0) {
        k11 = effective_decay(cfg.experiment.nbar, cfg.experiment.Tr_a);
        k22 = effective_decay(cfg.experiment.nbar, cfg.experiment.Tr_b);
    }
    cfg.params.k11 = k11;
    cfg.params.k22 = k22;
    cfg.params.omega1 = cfg.experiment.delta;
    cfg.params.omega2 = 0.0;

    if (root.contains("rates")) {
        const json& rates = root.at("rates");
        if (!rates.is_object()) {
            errs.push_back("$.rates: must be an object");
        } else {
            static const std::vector<std::string> rate_keys = {
                "k12", "k21", "delta11", "delta22", "delta12", "delta21"};
            for (const auto& [key, _] : rates.items())
                if (std::find(rate_keys.begin(), rate_keys.end(), key) == rate_keys.end())
                    unknown_key("$.rates." + key);
            auto cross = [&](const char* key, double& target) {
                if (!rates.contains(key)) return;
                const json& v = rates.at(key);
                if (v.is_string()) {
                    if (v.get<std::string>() == "dfs")
                        target = std::sqrt(k11 * k22);
                    else
                        errs.push_back(std::string("$.rates.") + key +
                                       ": only the string 'dfs' is understood");
                } else if (v.is_number()) {
                    target = v.get<double>();
                } else {
                    errs.push_back(std::string("$.rates.") + key +
                                   ": must be a number or 'dfs'");
                }
            };
            cross("k12", cfg.params.k12);
            cross("k21", cfg.params.k21);
            auto shift = [&](const char* key, double& target) {
                if (!rates.contains(key)) return;
                const json& v = rates.at(key);
                if (v.is_number())
                    target = v.get<double>();
                else
                    errs.push_back(std::string("$.rates.") + key + ": must be a number");
            };
            shift("delta11", cfg.params.delta11);
            shift("delta22", cfg.params.delta22);
            shift("delta12", cfg.params.delta12);
            shift("delta21", cfg.params.delta21);
        }
    }

    // T grid: explicit array or {start, stop, points}.
    if (!root.contains("T_grid")) {
        errs.push_back("$.T_grid: required");
    } else {
        const json& grid = root.at("T_grid");
        if (grid.is_array()) {
            for (const auto& v : grid) {
                if (!v.is_number()) {
                    errs.push_back("$.T_grid: entries must be numbers");
                    break;
                }
                cfg.experiment.T_grid.push_back(v.get<double>());
            }
        } else if (grid.is_object()) {
            double start = 0.0, stop = 0.0;
            long points = 512;
            if (!grid.contains("start") || !grid.at("start").is_number())
                errs.push_back("$.T_grid.start: required number");
            else
                start = grid.at("start").get<double>();
            if (!grid.contains("stop") || !grid.at("stop").is_number())
                errs.push_back("$.T_grid.stop: required number");
            else
                stop = grid.at("stop").get<double>();
            if (grid.contains("points")) {
                if (!grid.at("points").is_number_integer() || grid.at("points").get<long>() < 2)
                    errs.push_back("$.T_grid.points: must be an integer >= 2");
                else
                    points = grid.at("points").get<long>();
            }
            for (const auto& [key, _] : grid.items())
                if (key != "start" && key != "stop" && key != "points")
                    unknown_key("$.T_grid." + key);
            if (errs.empty() && !(stop > start))
                errs.push_back("$.T_grid: needs stop > start");
            if (errs.empty())
                for (long i = 0; i < points; ++i)
                    cfg.experiment.T_grid.push_back(
                        start + (stop - start) * static_cast<double>(i) /
                                    static_cast<double>(points - 1));
        } else {
            errs.push_back("$.T_grid: must be an array or {start, stop, points}");
        }
        for (std::size_t i = 1; i < cfg.experiment.T_grid.size(); ++i)
            if (!(cfg.experiment.T_grid[i] > cfg.experiment.T_grid[i - 1])) {
                errs.push_back("$.T_grid: must be strictly increasing");
                break;
            }
        if (!cfg.experiment.T_grid.empty() && cfg.experiment.Omega > 0.0 &&
            cfg.experiment.T_grid.front() < cfg.experiment.prep_time() - 1e-12)
            errs.push_back("$.T_grid: starts before the preparation ends at 3*pi/(2*Omega)");
    }

    if (!errs.empty()) {
        std::ostringstream os;
        os << "config '" << path << "' is invalid:";
        for (const auto& e : errs)
            os << "\n  " << e;
        throw ValidationError(os.str());
    }
    return cfg;
}

} // namespace dfscavity
