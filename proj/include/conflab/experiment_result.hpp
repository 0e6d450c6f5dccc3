#pragma once

// Experiment results, log-log exponent fits, flat key=value configs and the
// JSON / CSV / SVG writers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflab/error.hpp"
#include "conflab/rng.hpp"
#include "conflab/stats.hpp"

namespace conflab {

struct FitReport {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_norm = 0.0;
};

struct ScalePoint {
    double scale = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
};

/// Weighted least squares of log y on log x. Weights are 1/(yerr/y)^2 (the
/// variance of log y to first order) and the slope error comes from them; when
/// every yerr is 0 the fit is unweighted with a residual-based error. Zero
/// errors mixed with positive ones are raised to the smallest positive
/// relative error.
inline FitReport fit_exponent(const std::vector<ScalePoint>& pts) {
    if (pts.size() < 3) throw DomainError("fit_exponent: need at least 3 points");
    std::vector<double> lx, ly, rel;
    double min_rel = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        if (!(p.scale > 0.0) || !(p.estimate > 0.0) || !(p.stderr_ >= 0.0) || !std::isfinite(p.stderr_))
            throw DomainError("fit_exponent: scales and estimates must be positive, errors finite and >= 0");
        lx.push_back(std::log(p.scale));
        ly.push_back(std::log(p.estimate));
        rel.push_back(p.stderr_ / p.estimate);
        if (rel.back() > 0.0) min_rel = std::min(min_rel, rel.back());
    }
    stats::LinearFit f;
    if (!std::isfinite(min_rel)) {
        f = stats::linear_fit(lx, ly);
    } else {
        std::vector<double> w;
        for (double r : rel) w.push_back(1.0 / std::pow(std::max(r, min_rel), 2));
        f = stats::linear_fit(lx, ly, w, true);
    }
    return {f.slope, f.intercept, f.slope_stderr, f.residual_norm};
}

struct ExperimentResult {
    std::string experiment_id;
    std::map<std::string, std::string> parameters;
    std::uint64_t master_seed = 0;
    std::string generator{kGeneratorId};
    std::vector<ScalePoint> points;
    std::optional<FitReport> fit;
    std::map<std::string, double> metrics;  // experiment-specific scalars
    double runtime_seconds = 0.0;
};

inline nlohmann::json to_json(const ExperimentResult& r) {
    nlohmann::json j;
    j["experiment_id"] = r.experiment_id;
    j["parameters"] = r.parameters;
    j["master_seed"] = r.master_seed;
    j["generator"] = r.generator;
    j["points"] = nlohmann::json::array();
    for (const auto& p : r.points) j["points"].push_back({{"scale", p.scale}, {"estimate", p.estimate}, {"stderr", p.stderr_}});
    if (r.fit) {
        j["fit"] = {{"slope", r.fit->slope},
                    {"intercept", r.fit->intercept},
                    {"slope_stderr", r.fit->slope_stderr},
                    {"residual_norm", r.fit->residual_norm}};
    } else {
        j["fit"] = nullptr;
    }
    j["metrics"] = r.metrics;
    j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

inline ExperimentResult result_from_json(const nlohmann::json& j) {
    ExperimentResult r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.generator = j.at("generator").get<std::string>();
    for (const auto& p : j.at("points"))
        r.points.push_back({p.at("scale").get<double>(), p.at("estimate").get<double>(), p.at("stderr").get<double>()});
    if (!j.at("fit").is_null()) {
        const auto& f = j.at("fit");
        r.fit = FitReport{f.at("slope").get<double>(), f.at("intercept").get<double>(), f.at("slope_stderr").get<double>(),
                          f.at("residual_norm").get<double>()};
    }
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    return r;
}

/// Keys are sorted, so equal results serialize to equal bytes.
inline std::string result_json_string(const ExperimentResult& r) { return to_json(r).dump(2) + "\n"; }

inline void write_points_csv(std::ostream& os, const ExperimentResult& r) {
    os << "scale,estimate,stderr\n" << std::setprecision(17);
    for (const auto& p : r.points) os << p.scale << ',' << p.estimate << ',' << p.stderr_ << '\n';
}

/// Log-log scatter of the points with error bars and the fitted line.
inline void write_points_svg(std::ostream& os, const ExperimentResult& r) {
    const double W = 640, H = 480, m = 60;
    std::vector<const ScalePoint*> pos;
    for (const auto& p : r.points)
        if (p.scale > 0 && p.estimate > 0) pos.push_back(&p);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << m << "\" y=\"30\" font-family=\"sans-serif\" font-size=\"16\">" << r.experiment_id;
    if (r.fit) os << "  slope " << std::setprecision(4) << r.fit->slope << " ± " << r.fit->slope_stderr;
    os << "</text>\n";
    if (pos.empty()) {
        os << "</svg>\n";
        return;
    }
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto* p : pos) {
        const double lx = std::log10(p->scale), lyl = std::log10(std::max(p->estimate - p->stderr_, p->estimate * 0.5)),
                     lyh = std::log10(p->estimate + p->stderr_);
        x0 = std::min(x0, lx);
        x1 = std::max(x1, lx);
        y0 = std::min(y0, lyl);
        y1 = std::max(y1, lyh);
    }
    if (x1 - x0 < 1e-9) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 - y0 < 1e-9) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto sx = [&](double lx) { return m + (lx - x0) / (x1 - x0) * (W - 2 * m); };
    auto sy = [&](double ly) { return H - m - (ly - y0) / (y1 - y0) * (H - 2 * m); };
    os << std::setprecision(6);
    os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" font-family=\"sans-serif\" font-size=\"12\">log10 scale</text>\n";
    os << "<text x=\"10\" y=\"" << H / 2 << "\" font-family=\"sans-serif\" font-size=\"12\">log10 estimate</text>\n";
    for (const auto* p : pos) {
        const double cx = sx(std::log10(p->scale)), cy = sy(std::log10(p->estimate));
        if (p->stderr_ > 0) {
            const double lo = std::max(p->estimate - p->stderr_, p->estimate * 0.5);
            os << "<line x1=\"" << cx << "\" y1=\"" << sy(std::log10(lo)) << "\" x2=\"" << cx << "\" y2=\""
               << sy(std::log10(p->estimate + p->stderr_)) << "\" stroke=\"gray\"/>\n";
        }
        os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    if (r.fit) {
        auto fy = [&](double lx) { return (r.fit->slope * lx * std::log(10.0) + r.fit->intercept) / std::log(10.0); };
        os << "<line x1=\"" << sx(x0) << "\" y1=\"" << sy(fy(x0)) << "\" x2=\"" << sx(x1) << "\" y2=\"" << sy(fy(x1))
           << "\" stroke=\"firebrick\" stroke-width=\"2\"/>\n";
    }
    os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Flat key = value configuration

/// Lines of `key = value`; `#` starts a comment, blank lines are ignored and
/// values may be wrapped in double quotes. Lists are comma separated and may be
/// bracketed, so flat TOML files parse unchanged. Typed getters record every
/// key they read so unread keys can be rejected.
class Config {
public:
    Config() = default;

    static Config parse(std::istream& is) {
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno), "config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "config line " + std::to_string(lineno) + ": empty key");
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            if (c.values_.count(key)) throw ConfigError(key, "config: duplicate key '" + key + "'");
            c.values_[key] = value;
        }
        return c;
    }
    static Config parse_string(const std::string& s) {
        std::istringstream is(s);
        return parse(is);
    }
    static Config load(const std::string& file) {
        std::ifstream in(file);
        if (!in) throw ConfigError("file", "cannot open config file '" + file + "'");
        return parse(in);
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
    /// Keys as given, plus defaults filled in by the getters that read them.
    [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        used_[key] = true;
        if (auto it = values_.find(key); it != values_.end()) return it->second;
        if (!fallback) throw ConfigError(key, "config: missing required key '" + key + "'");
        values_[key] = *fallback;
        return *fallback;
    }
    double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) {
        used_[key] = true;
        auto it = values_.find(key);
        if (it == values_.end()) {
            if (!fallback) throw ConfigError(key, "config: missing required key '" + key + "'");
            values_[key] = format_number(*fallback);
            return *fallback;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, "config: key '" + key + "' expects a number, got '" + it->second + "'");
        }
    }
    long long get_int(const std::string& key, std::optional<long long> fallback = std::nullopt) {
        used_[key] = true;
        auto it = values_.find(key);
        if (it == values_.end()) {
            if (!fallback) throw ConfigError(key, "config: missing required key '" + key + "'");
            values_[key] = std::to_string(*fallback);
            return *fallback;
        }
        long long v = 0;
        const auto& s = it->second;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ConfigError(key, "config: key '" + key + "' expects an integer, got '" + s + "'");
        return v;
    }
    long long get_positive(const std::string& key, std::optional<long long> fallback = std::nullopt) {
        const long long v = get_int(key, fallback);
        if (v < 1) throw ConfigError(key, "config: key '" + key + "' must be >= 1");
        return v;
    }
    /// Comma-separated numbers.
    std::vector<double> get_list(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
        used_[key] = true;
        auto it = values_.find(key);
        if (it == values_.end()) {
            if (!fallback) throw ConfigError(key, "config: missing required key '" + key + "'");
            std::string joined;
            for (double v : *fallback) joined += (joined.empty() ? "" : ",") + format_number(v);
            values_[key] = joined;
            return *fallback;
        }
        std::vector<double> out;
        std::string body = it->second;
        if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(item, &pos));
                if (pos != item.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError(key, "config: key '" + key + "' expects a comma-separated list of numbers");
            }
        }
        if (out.empty()) throw ConfigError(key, "config: key '" + key + "' is empty");
        return out;
    }

    /// Throws on the first key never read by a getter.
    void reject_unused() const {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) throw ConfigError(k, "config: unknown key '" + k + "'");
    }

    /// Shortest decimal form that reads back to the same double.
    static std::string format_number(double v) {
        char buf[32];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, ptr);
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
    std::map<std::string, bool> used_;
};

}  // namespace conflab
