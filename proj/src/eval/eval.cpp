// SPDX-License-Identifier: Apache-2.0
#include "dtcb/eval.hpp"
#include "dtcb/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dtcb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Linear interpolation between order statistics.
double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

EvalReport make_report(const ChannelDataset& ds, const std::string& method, const std::string& scenario) {
    if (ds.empty()) throw DataError("evaluate: empty dataset");
    EvalReport r;
    r.method = method;
    r.scenario = scenario;
    r.user_ids.reserve(ds.size());
    for (const ChannelRecord& rec : ds.records) {
        r.user_ids.push_back(rec.user_id);
        r.is_los.push_back(rec.is_los);
    }
    r.snr_db.assign(ds.size(), kNegInf);
    r.beam_index.assign(ds.size(), -1);
    return r;
}

void check_array(const Codebook& cb, const ChannelDataset& ds) {
    if (!(cb.array == ds.array)) throw DataError("evaluate: codebook and dataset array configurations differ");
    if (cb.beams.empty()) throw DataError("evaluate: empty codebook");
}

// Best beam per user over the subset `users` of the dataset.
void fill_best(const Codebook& cb, const ChannelDataset& ds, const LinkBudget& lb,
               const std::vector<std::size_t>& users, EvalReport& r) {
    if (users.empty()) return;
    std::vector<const ChannelVector*> ptrs;
    ptrs.reserve(users.size());
    for (std::size_t i : users) ptrs.push_back(&ds.records[i].channel);
    const ChannelBlock block(std::span<const ChannelVector* const>(ptrs), static_cast<std::size_t>(ds.array.num_antennas));
    std::vector<double> best(users.size(), -1.0);
    std::vector<int> idx(users.size(), 0);
    std::vector<double> g(users.size());
    for (std::size_t n = 0; n < cb.beams.size(); ++n) {
        block.gains(cb.beams[n], g);
        for (std::size_t u = 0; u < users.size(); ++u) {
            if (g[u] > best[u]) {
                best[u] = g[u];
                idx[u] = static_cast<int>(n);
            }
        }
    }
    for (std::size_t u = 0; u < users.size(); ++u) {
        const std::size_t i = users[u];
        if (ds.records[i].channel.is_outage()) continue;
        r.snr_db[i] = snr_from_gain(best[u], lb).db;
        r.beam_index[i] = idx[u];
    }
}

} // namespace

void EvalReport::summarize() {
    std::vector<double> finite;
    finite.reserve(snr_db.size());
    for (double v : snr_db)
        if (std::isfinite(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());
    finite_count = finite.size();
    outage_frac = snr_db.empty() ? 0.0 : 1.0 - static_cast<double>(finite.size()) / static_cast<double>(snr_db.size());
    if (finite.empty()) {
        mean_db = p10 = p50 = p90 = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double s = 0.0;
    for (double v : finite) s += v;
    mean_db = s / static_cast<double>(finite.size());
    p10 = percentile(finite, 0.10);
    p50 = percentile(finite, 0.50);
    p90 = percentile(finite, 0.90);
}

std::vector<std::pair<double, double>> EvalReport::cdf() const {
    std::vector<double> finite;
    for (double v : snr_db)
        if (std::isfinite(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(finite.size());
    for (std::size_t i = 0; i < finite.size(); ++i)
        out.emplace_back(finite[i], static_cast<double>(i + 1) / static_cast<double>(finite.size()));
    return out;
}

EvalReport EvalReport::subset(bool los) const {
    EvalReport out;
    out.method = method;
    out.scenario = scenario + (los ? "/los" : "/nlos");
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        if (is_los[i] != los) continue;
        out.user_ids.push_back(user_ids[i]);
        out.is_los.push_back(is_los[i]);
        out.snr_db.push_back(snr_db[i]);
        out.beam_index.push_back(beam_index[i]);
    }
    out.summarize();
    return out;
}

EvalReport evaluate_codebook(const Codebook& cb, const ChannelDataset& ds, const LinkBudget& lb,
                             const std::string& method, const std::string& scenario) {
    EvalReport r = make_report(ds, method, scenario);
    check_array(cb, ds);
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    fill_best(cb, ds, lb, all, r);
    r.summarize();
    return r;
}

EvalReport evaluate_split(const Codebook& los_cb, const Codebook& nlos_cb, const ChannelDataset& ds,
                          const LinkBudget& lb, const std::string& method, const std::string& scenario) {
    EvalReport r = make_report(ds, method, scenario);
    check_array(los_cb, ds);
    check_array(nlos_cb, ds);
    std::vector<std::size_t> los;
    std::vector<std::size_t> nlos;
    for (std::size_t i = 0; i < ds.size(); ++i) (ds.records[i].is_los ? los : nlos).push_back(i);
    fill_best(los_cb, ds, lb, los, r);
    fill_best(nlos_cb, ds, lb, nlos, r);
    r.summarize();
    return r;
}

EvalReport evaluate_egc(const ChannelDataset& ds, const LinkBudget& lb, const std::string& scenario) {
    EvalReport r = make_report(ds, "egc", scenario);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const ChannelVector& h = ds.records[i].channel;
        if (h.is_outage()) continue;
        r.snr_db[i] = snr_from_gain(egc_gain(h), lb).db;
    }
    r.summarize();
    return r;
}

Comparison compare(std::span<const EvalReport> reports) {
    if (reports.empty()) throw DataError("compare: no reports");
    for (const EvalReport& r : reports)
        if (r.user_ids != reports[0].user_ids) throw DataError("compare: reports cover different user sets");
    Comparison c;
    for (const EvalReport& r : reports) c.rows.push_back({r.method, r.mean_db, r.p10, r.p50, r.p90, r.outage_frac});
    c.mean_delta_db.assign(reports.size(), std::vector<double>(reports.size(), 0.0));
    for (std::size_t i = 0; i < reports.size(); ++i)
        for (std::size_t j = 0; j < reports.size(); ++j)
            c.mean_delta_db[i][j] = i == j ? 0.0 : reports[i].mean_db - reports[j].mean_db;
    return c;
}

SnrMap snr_map(const EvalReport& report, const ChannelDataset& ds) {
    SnrMap m;
    m.grid = ds.grid;
    m.nx = ds.grid.nx();
    m.ny = ds.grid.ny();
    const std::size_t cells = static_cast<std::size_t>(m.nx) * static_cast<std::size_t>(m.ny);
    m.snr_db.assign(cells, std::numeric_limits<double>::quiet_NaN());
    m.flags.assign(cells, CellFlag::NoUser);
    for (std::size_t i = 0; i < report.size(); ++i) {
        const std::int64_t id = report.user_ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= cells) throw DataError("snr map: user id outside the grid");
        m.snr_db[static_cast<std::size_t>(id)] = report.snr_db[i];
        m.flags[static_cast<std::size_t>(id)] = std::isfinite(report.snr_db[i]) ? CellFlag::Ok : CellFlag::Outage;
    }
    return m;
}

SnrMap snr_map(const Codebook& cb, const ChannelDataset& ds, const LinkBudget& lb) {
    return snr_map(evaluate_codebook(cb, ds, lb), ds);
}

std::vector<PatternSample> beam_pattern(const Beam& w, const ArrayConfig& cfg, int resolution) {
    if (resolution < 2) throw ConfigError("beam pattern: resolution must be >= 2");
    if (w.size() != static_cast<std::size_t>(cfg.num_antennas)) throw DataError("beam pattern: width mismatch");
    std::vector<PatternSample> out;
    out.reserve(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        const double phi = kPi * i / (resolution - 1);
        ChannelVector a;
        a.h = array_response(cfg, phi);
        out.push_back({phi, to_db(combining_gain(w, a))});
    }
    return out;
}

std::string cdf_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "snr_db,prob\n";
    for (const auto& [v, p] : r.cdf()) os << format_double(std::max(v, kPlotFloorDb)) << ',' << format_double(p) << '\n';
    return os.str();
}

std::string map_csv(const SnrMap& m) {
    std::ostringstream os;
    os << "x,y,snr_db\n";
    for (int iy = 0; iy < m.ny; ++iy) {
        for (int ix = 0; ix < m.nx; ++ix) {
            if (m.flag(ix, iy) == CellFlag::NoUser) continue;
            const Vec3 p = m.grid.point(ix, iy);
            os << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(m.at(ix, iy)) << '\n';
        }
    }
    return os.str();
}

std::string pattern_csv(std::span<const PatternSample> p) {
    std::ostringstream os;
    os << "angle_rad,gain_db\n";
    for (const PatternSample& s : p) os << format_double(s.angle) << ',' << format_double(s.gain_db) << '\n';
    return os.str();
}

json summary_json(const EvalReport& r) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"method", r.method},       {"scenario", r.scenario}, {"mean_db", num(r.mean_db)},
            {"p10", num(r.p10)},        {"p50", num(r.p50)},      {"p90", num(r.p90)},
            {"outage_frac", r.outage_frac}, {"users", r.size()}};
}

} // namespace dtcb
