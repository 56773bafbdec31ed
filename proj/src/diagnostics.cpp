#include "rdlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rdlab/errors.hpp"

namespace rdlab {

namespace {

int band_sign(double v, double tol) {
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

double derivative_at(std::span<const double> v, std::size_t j, double dx) {
    const std::size_t n = v.size();
    if (j == 0) return (v[1] - v[0]) / dx;
    if (j + 1 == n) return (v[n - 1] - v[n - 2]) / dx;
    return (v[j + 1] - v[j - 1]) / (2.0 * dx);
}

double interpolate_at(const UniformSamples& s, double x) {
    const double pos = (x - s.x0) / s.dx;
    const auto n = s.values.size();
    if (pos <= 0.0) return s.values.front();
    if (pos >= static_cast<double>(n - 1)) return s.values.back();
    const auto j = static_cast<std::size_t>(std::floor(pos));
    const double w = pos - static_cast<double>(j);
    if (w == 0.0) return s.values[j];
    return (1.0 - w) * s.values[j] + w * s.values[j + 1];
}

double crossing(const UniformSamples& s, std::size_t l, std::size_t r) {
    for (std::size_t j = l; j < r; ++j) {
        const double a = s.values[j], b = s.values[j + 1];
        if (a == 0.0) return s.x(j);
        if ((a > 0.0) != (b > 0.0) && b != 0.0) return s.x(j) + s.dx * a / (a - b);
    }
    return s.x(r);
}

}  // namespace

std::size_t ZeroReport::multiple_count() const {
    return static_cast<std::size_t>(std::count_if(zeros.begin(), zeros.end(), [](const Zero& z) { return z.multiple; }));
}

ZeroReport count_zeros(const UniformSamples& s, Interval interval, const ZeroTolerances& tol) {
    if (!(interval.lo < interval.hi)) throw ArgumentError("zero-width interval");
    const std::size_t n = s.values.size();
    if (n < 2) throw ArgumentError("need at least two samples");
    const double margin = 1e-9 * s.dx;
    std::size_t j0 = n, j1 = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = s.x(j);
        if (x > interval.lo + margin && x < interval.hi - margin) {
            j0 = std::min(j0, j);
            j1 = j;
        }
    }
    if (j0 == n || j1 <= j0) throw ArgumentError("interval holds fewer than two samples");

    double scale = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) scale = std::max(scale, std::abs(s.values[j]));

    ZeroReport rep;
    rep.interval = interval;
    rep.tol_v = tol.tol_v.value_or(tol.rel_value * scale);
    rep.tol_d = tol.tol_d.value_or(tol.rel_derivative * scale);
    if (scale <= tol.abs_floor || scale <= rep.tol_v) throw DegenerateError("identically zero within tolerance");

    const double va = interpolate_at(s, interval.lo), vb = interpolate_at(s, interval.hi);
    rep.endpoints_nonzero = std::abs(va) > rep.tol_v && std::abs(vb) > rep.tol_v;

    int last_sign = 0;
    std::size_t last_idx = j0;
    std::size_t cluster_start = n;
    bool leading = true;
    for (std::size_t j = j0; j <= j1; ++j) {
        const int sg = band_sign(s.values[j], rep.tol_v);
        if (sg == 0) {
            if (cluster_start == n) cluster_start = j;
            continue;
        }
        if (leading) {
            if (cluster_start != n) rep.endpoints_nonzero = false;
            leading = false;
        } else if (cluster_start == n) {
            if (sg != last_sign) {
                rep.zeros.push_back({crossing(s, last_idx, j), false});
                ++rep.count;
            }
        } else {
            bool flat = false;
            std::size_t best = cluster_start;
            for (std::size_t i = cluster_start; i < j; ++i) {
                if (std::abs(derivative_at(s.values, i, s.dx)) <= rep.tol_d) flat = true;
                if (std::abs(s.values[i]) < std::abs(s.values[best])) best = i;
            }
            if (sg != last_sign) {
                rep.zeros.push_back({flat ? s.x(best) : crossing(s, last_idx, j), flat});
                ++rep.count;
            } else if (flat) {
                rep.zeros.push_back({s.x(best), true});
                ++rep.count;
            }
        }
        cluster_start = n;
        last_sign = sg;
        last_idx = j;
    }
    if (cluster_start != n) rep.endpoints_nonzero = false;
    for (const auto& z : rep.zeros)
        if (z.x - interval.lo < s.dx || interval.hi - z.x < s.dx) rep.truncated = true;
    return rep;
}

ZeroReport count_zeros(const Profile& p, Interval interval, const ZeroTolerances& tol) {
    return count_zeros(UniformSamples::of(p), interval, tol);
}

Reflection reflect_diff(const Profile& p, double lambda) {
    const Grid& g = p.grid;
    if (!(std::abs(lambda) < g.half_width())) throw ArgumentError("lambda outside the grid");
    const std::size_t m = g.nearest(lambda);
    Reflection r;
    r.lambda = g.x(m);
    r.snap_distance = std::abs(lambda - r.lambda);
    r.half_nodes = std::min(m, g.size() - 1 - m);
    if (r.half_nodes == 0) throw ArgumentError("lambda on the boundary");
    r.values.resize(2 * r.half_nodes + 1);
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        const std::size_t j = m - r.half_nodes + k;  // x_j
        const std::size_t jr = m + r.half_nodes - k;  // 2 lambda - x_j
        r.values[k] = p.values[jr] - p.values[j];
    }
    return r;
}

ZeroHistory zero_history(const Grid& grid, const std::vector<Snapshot>& snapshots, const Companion& comp,
                         Interval interval, const ZeroTolerances& tol) {
    ZeroHistory hist;
    std::vector<double> v(grid.size());
    if (const auto* f = std::get_if<companion::Fixed>(&comp); f && f->psi.size() != grid.size())
        throw ArgumentError("companion profile does not match the grid");
    if (const auto* o = std::get_if<companion::OtherRun>(&comp)) {
        if (!o->snapshots || o->snapshots->size() != snapshots.size())
            throw ArgumentError("companion run has a different snapshot count");
    }

    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const Snapshot& snap = snapshots[k];
        UniformSamples samples{grid.x(0), grid.dx(), {}};
        Reflection refl;
        bool have = true;
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, companion::Fixed>) {
                    for (std::size_t j = 0; j < v.size(); ++j) v[j] = snap.u[j] - c.psi[j];
                    samples.values = v;
                } else if constexpr (std::is_same_v<T, companion::OtherRun>) {
                    const Snapshot& other = (*c.snapshots)[k];
                    if (other.t != snap.t || other.u.size() != snap.u.size())
                        throw ArgumentError("companion run snapshots are not aligned");
                    for (std::size_t j = 0; j < v.size(); ++j) v[j] = snap.u[j] - other.u[j];
                    samples.values = v;
                } else if constexpr (std::is_same_v<T, companion::Reflect>) {
                    refl = reflect_diff(Profile{grid, snap.u}, c.lambda);
                    samples = refl.samples(grid.dx());
                } else {
                    if (snap.ut.empty()) {
                        have = false;
                        return;
                    }
                    samples.values = snap.ut;
                }
            },
            comp);
        if (!have) continue;
        ZeroReport rep;
        try {
            rep = count_zeros(samples, interval, tol);
        } catch (const DegenerateError&) {
            rep.interval = interval;
            rep.degenerate = true;
            rep.endpoints_nonzero = false;
        }
        rep.t = snap.t;
        hist.reports.push_back(std::move(rep));
    }

    const double dx = grid.dx();
    const ZeroReport* prev = nullptr;
    for (const auto& rep : hist.reports) {
        bool ok = rep.endpoints_nonzero && !rep.degenerate;
        for (const auto& z : rep.zeros)
            if (z.x - interval.lo < 2.0 * dx || interval.hi - z.x < 2.0 * dx) ok = false;
        if (!ok) {
            hist.excluded_times.push_back(rep.t);
            continue;
        }
        ++hist.audited;
        if (prev && rep.count > prev->count) hist.increases.emplace_back(prev->t, rep.t);
        prev = &rep;
    }
    hist.caveat =
        "counts are only comparable while v stays away from zero at both interval endpoints; snapshots violating "
        "this, or with a zero within 2 dx of an endpoint, are excluded from the audit";
    return hist;
}

std::vector<CriticalPoint> critical_points(const Grid& grid, std::span<const double> u, Interval interval,
                                           double rel_band) {
    const std::size_t n = grid.size();
    const double dx = grid.dx();
    std::vector<std::size_t> idx;
    std::vector<double> d;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double x = grid.x(j);
        if (x <= interval.lo || x >= interval.hi) continue;
        idx.push_back(j);
        d.push_back((u[j + 1] - u[j - 1]) / (2.0 * dx));
    }
    double scale = 0.0;
    for (double di : d) scale = std::max(scale, std::abs(di));
    std::vector<CriticalPoint> out;
    if (scale == 0.0) return out;
    const double band = rel_band * scale;

    int last_sign = 0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const int sg = band_sign(d[k], band);
        if (sg == 0) continue;
        if (last_sign != 0 && sg != last_sign) {
            const bool maximum = last_sign > 0;
            std::size_t m = idx[last];
            for (std::size_t q = last; q <= k; ++q) {
                const std::size_t j = idx[q];
                if (maximum ? u[j] > u[m] : u[j] < u[m]) m = j;
            }
            double x = grid.x(m), val = u[m];
            const double denom = u[m - 1] - 2.0 * u[m] + u[m + 1];
            if (denom != 0.0) {
                const double delta = std::clamp(0.5 * (u[m - 1] - u[m + 1]) / denom, -1.0, 1.0);
                x += delta * dx;
                val -= 0.25 * (u[m - 1] - u[m + 1]) * delta;
            }
            out.push_back({x, val, maximum});
        }
        last_sign = sg;
        last = k;
    }
    return out;
}

std::vector<CriticalTrack> track_critical_points(const Grid& grid, const std::vector<Snapshot>& snapshots,
                                                 Interval interval, const TrackOptions& opts) {
    const double radius = opts.match_radius.value_or(5.0 * grid.dx());
    std::vector<CriticalTrack> tracks;
    int next_id = 0;
    for (const Snapshot& snap : snapshots) {
        const auto pts = critical_points(grid, snap.u, interval, opts.rel_band);
        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
            if (tracks[ti].terminated) continue;
            const double xl = tracks[ti].samples.back().x;
            for (std::size_t pi = 0; pi < pts.size(); ++pi) {
                const double dist = std::abs(pts[pi].x - xl);
                if (dist <= radius) pairs.emplace_back(dist, ti, pi);
            }
        }
        std::sort(pairs.begin(), pairs.end());
        std::vector<char> track_used(tracks.size(), 0), point_used(pts.size(), 0);
        for (const auto& [dist, ti, pi] : pairs) {
            if (track_used[ti] || point_used[pi]) continue;
            track_used[ti] = point_used[pi] = 1;
            tracks[ti].samples.push_back({snap.t, pts[pi].x, pts[pi].u, pts[pi].maximum});
        }
        for (std::size_t ti = 0; ti < track_used.size(); ++ti)
            if (!track_used[ti]) tracks[ti].terminated = true;
        for (std::size_t pi = 0; pi < pts.size(); ++pi) {
            if (point_used[pi]) continue;
            CriticalTrack tr;
            tr.id = next_id++;
            tr.samples.push_back({snap.t, pts[pi].x, pts[pi].u, pts[pi].maximum});
            tracks.push_back(std::move(tr));
        }
    }
    if (snapshots.empty()) return tracks;
    const double t0 = snapshots.front().t, t1 = snapshots.back().t;
    const double late = t1 - opts.late_fraction * (t1 - t0);
    for (auto& tr : tracks) {
        if (tr.terminated) continue;
        double tv = 0.0;
        const CriticalSample* prev = nullptr;
        for (const auto& s : tr.samples) {
            if (s.t < late) continue;
            if (prev) tv += std::abs(s.x - prev->x);
            prev = &s;
        }
        tr.stabilization = tv;
    }
    return tracks;
}

std::string case_name(Case c) {
    switch (c) {
        case Case::C1: return "C1";
        case Case::C2: return "C2";
        case Case::C3: return "C3";
        case Case::Undetermined: return "undetermined";
    }
    return "undetermined";
}

CaseTag classify_case(const std::vector<CriticalTrack>& tracks, int k_max, double t_first, double t_last,
                      double late_fraction) {
    CaseTag tag;
    tag.late_start = t_last - late_fraction * (t_last - t_first);
    if (k_max < 2) {
        tag.note = "need at least two windows";
        return tag;
    }
    tag.counts.assign(static_cast<std::size_t>(k_max), 0);
    for (const auto& tr : tracks) {
        if (tr.terminated || tr.samples.empty() || tr.samples.front().t > tag.late_start) continue;
        double reach = 0.0;
        for (const auto& s : tr.samples)
            if (s.t >= tag.late_start) reach = std::max(reach, std::abs(s.x));
        for (int k = 1; k <= k_max; ++k)
            if (reach < k) ++tag.counts[static_cast<std::size_t>(k - 1)];
    }
    const int last = tag.counts.back();
    int k0 = k_max;
    while (k0 > 1 && tag.counts[static_cast<std::size_t>(k0 - 2)] == last) --k0;
    if (k0 == k_max) {
        tag.note = "counts still change at the largest window";
        return tag;
    }
    tag.k0 = k0;
    tag.tag = last == 0 ? Case::C1 : (last == 1 ? Case::C2 : Case::C3);
    return tag;
}

VlambdaDecay vlambda_decay(const Grid& grid, const std::vector<Snapshot>& snapshots, double lambda, double radius) {
    if (!(radius > 0.0)) throw ArgumentError("radius must be positive");
    VlambdaDecay out;
    const std::size_t m = grid.nearest(lambda);
    out.lambda = grid.x(m);
    const double dx = grid.dx();
    std::size_t K = static_cast<std::size_t>(std::floor(radius / dx + 1e-9));
    K = std::min({K, m, grid.size() - 1 - m});
    if (K < 1) throw ArgumentError("window around lambda is empty");
    std::vector<double> V(2 * K + 1);
    for (const auto& snap : snapshots) {
        for (std::size_t k = 0; k < V.size(); ++k) V[k] = snap.u[m + K - k] - snap.u[m - K + k];
        DecaySample s{snap.t, 0.0, 0.0};
        for (double x : V) s.sup_v = std::max(s.sup_v, std::abs(x));
        for (std::size_t k = 1; k + 1 < V.size(); ++k)
            s.sup_dv = std::max(s.sup_dv, std::abs(V[k + 1] - V[k - 1]) / (2.0 * dx));
        out.peak = std::max(out.peak, s.sup_v + s.sup_dv);
        out.series.push_back(s);
    }
    if (!out.series.empty()) out.last = out.series.back().sup_v + out.series.back().sup_dv;
    out.decayed = out.last <= 0.05 * out.peak;
    return out;
}

double energy_window(const Profile& p, const NonlinearitySpec& spec, double R) {
    const Grid& g = p.grid;
    const double dx = g.dx();
    const std::size_t c = g.center();
    std::size_t m = static_cast<std::size_t>(std::floor(R / dx + 1e-9));
    m = std::min(m, c - 1);
    if (m == 0) throw ArgumentError("energy window narrower than one cell");
    double sum = 0.0;
    for (std::size_t j = c - m; j <= c + m; ++j) {
        const double d = (p.values[j + 1] - p.values[j - 1]) / (2.0 * dx);
        const double e = 0.5 * d * d - eval_F(spec, p.values[j]);
        sum += (j == c - m || j == c + m) ? 0.5 * e : e;
    }
    return sum * dx;
}

}  // namespace rdlab
