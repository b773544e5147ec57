#include "vvc/mldroop_fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vvc/error.hpp"
#include "vvc/simulation.hpp"

namespace vvc {

std::vector<std::pair<double, double>> TrainingSet::pairs_for(int inverter_bus) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : samples)
        if (s.inverter_bus == inverter_bus) out.emplace_back(s.v_pu, s.q_kvar);
    return out;
}

TrainingSet generate_training_data(const Network& network, const ProfileSet& profiles,
                                   const TrainingOptions& options) {
    if (profiles.size() == 0) throw InvalidArgument("training: empty profile set");
    if (options.require_full_day &&
        static_cast<std::int64_t>(profiles.size()) * std::max<std::int64_t>(profiles.step(), 1) < 86400)
        throw InvalidArgument("training: profiles must cover at least one day");

    const RadialPowerFlow pf(network);
    const auto buses = network.inverter_buses();
    const auto q_lo = network.q_min_kvar();
    const auto q_hi = network.q_max_kvar();

    TrainingSet set;
    set.samples.reserve(profiles.size() * buses.size());
    for (std::size_t t = 0; t < profiles.size(); ++t) {
        const Injections w = uncontrolled_injections(network, profiles, t, options.load_power_factor);
        try {
            const auto r = orpf_solve(network, pf, w, q_lo, q_hi, network.v_min, network.v_max, options.orpf);
            Injections inj = w;
            for (std::size_t j = 0; j < buses.size(); ++j) inj.q_kvar[static_cast<std::size_t>(buses[j])] += r.q_kvar[j];
            const auto sol = pf.solve(inj);
            if (!sol.converged) {
                ++set.skipped_steps;
                continue;
            }
            for (std::size_t j = 0; j < buses.size(); ++j)
                set.samples.push_back({profiles.timestamps[t], buses[j], sol.v_mag[static_cast<std::size_t>(buses[j])],
                                       std::clamp(r.q_kvar[j], q_lo[j], q_hi[j])});
        } catch (const NumericalError&) {
            ++set.skipped_steps;
        }
    }
    return set;
}

namespace {

// Interpolation weights of v on the uniform grid, constant extension outside.
template <typename Row>
void basis_row(double v, double v0, double dv, int k, Row&& row) {
    row.setZero();
    const double pos = (v - v0) / dv;
    if (pos <= 0.0) {
        row(0) = 1.0;
    } else if (pos >= k - 1) {
        row(k - 1) = 1.0;
    } else {
        const int i = std::min(static_cast<int>(pos), k - 2);
        const double t = pos - i;
        row(i) = 1.0 - t;
        row(i + 1) = t;
    }
}

struct KktSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd mu;  // multipliers of the working inequalities
};

std::optional<KktSolution> solve_kkt(const QuadraticProgram& qp, const std::vector<Eigen::Index>& working) {
    const Eigen::Index n = qp.size();
    const Eigen::Index me = qp.eq.rows();
    const auto na = static_cast<Eigen::Index>(working.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na + me, n + na + me);
    Eigen::VectorXd rhs(n + na + me);
    kkt.topLeftCorner(n, n) = qp.hessian;
    rhs.head(n) = -qp.linear;
    for (Eigen::Index a = 0; a < na; ++a) {
        kkt.block(n + a, 0, 1, n) = qp.ineq.row(working[static_cast<std::size_t>(a)]);
        kkt.block(0, n + a, n, 1) = qp.ineq.row(working[static_cast<std::size_t>(a)]).transpose();
        rhs(n + a) = qp.ineq_rhs(working[static_cast<std::size_t>(a)]);
    }
    kkt.block(n + na, 0, me, n) = qp.eq;
    kkt.block(0, n + na, n, me) = qp.eq.transpose();
    rhs.tail(me) = qp.eq_rhs;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (lu.rank() < kkt.rows()) return std::nullopt;
    const Eigen::VectorXd sol = lu.solve(rhs);
    return KktSolution{sol.head(n), sol.segment(n, na)};
}

// Exact solution by active-set refinement, starting from the working set
// suggested by the dual iteration's multipliers.
std::optional<Eigen::VectorXd> refine(const QuadraticProgram& qp, const QpSolution& approx) {
    const Eigen::Index mi = qp.ineq.rows();
    const double mu_scale = std::max(1.0, mi ? approx.ineq_multipliers.maxCoeff() : 0.0);
    std::vector<Eigen::Index> working;
    for (Eigen::Index i = 0; i < mi; ++i)
        if (approx.ineq_multipliers(i) > 1e-8 * mu_scale) working.push_back(i);

    constexpr double tol = 1e-11;
    for (int iter = 0; iter < 4 * static_cast<int>(mi) + 8; ++iter) {
        const auto kkt = solve_kkt(qp, working);
        if (!kkt) return std::nullopt;
        Eigen::Index drop = -1;
        double most_negative = -tol * mu_scale;
        for (Eigen::Index a = 0; a < kkt->mu.size(); ++a)
            if (kkt->mu(a) < most_negative) {
                most_negative = kkt->mu(a);
                drop = a;
            }
        if (drop >= 0) {
            working.erase(working.begin() + drop);
            continue;
        }
        Eigen::Index add = -1;
        double worst = tol;
        for (Eigen::Index i = 0; i < mi; ++i) {
            const double r = qp.ineq.row(i).dot(kkt->x) - qp.ineq_rhs(i);
            if (r > worst && std::find(working.begin(), working.end(), i) == working.end()) {
                worst = r;
                add = i;
            }
        }
        if (add < 0) return kkt->x;
        working.push_back(add);
    }
    return std::nullopt;
}

}  // namespace

MlDroopCurve fit_curve(const std::vector<std::pair<double, double>>& pairs, double q_min, double q_max,
                       double v_min, double v_max, const FitOptions& o) {
    if (pairs.empty()) throw InvalidArgument("fit_curve: no training pairs");
    std::set<double> distinct;
    for (const auto& [v, q] : pairs) {
        if (!std::isfinite(v) || !std::isfinite(q)) throw InvalidArgument("fit_curve: non-finite training pair");
        distinct.insert(v);
    }
    if (distinct.size() < 2) throw InvalidArgument("fit_curve: need at least two distinct voltages");
    if (!(q_min <= 0.0 && 0.0 <= q_max)) throw InvalidArgument("fit_curve: q box must contain 0");
    if (!(v_min < v_max)) throw InvalidArgument("fit_curve: v_min must be below v_max");
    if (o.breakpoints < 3 || !(o.margin_pu > 0.0) || !(o.slope_floor < 0.0))
        throw InvalidArgument("fit_curve: need >= 3 breakpoints, positive margin, negative slope floor");
    if ((q_min - q_max) / (v_max - v_min) < o.slope_floor * (1.0 + 1e-12))
        throw NumericalError("fit_curve: joining (v_min, q_max) to (v_max, q_min) needs a slope below the floor");

    const int k = o.breakpoints;
    const double v0 = v_min - o.margin_pu;
    const double dv = (v_max + o.margin_pu - v0) / (k - 1);
    // Ordinates are solved in units of the box size to keep the QP well scaled.
    const double scale = std::max({q_max, -q_min, 1e-9});

    // Samples outside [v_min, v_max] are left out: there the clamped curve
    // equals the pinned limit whatever the ordinates are.
    std::vector<std::pair<double, double>> inside;
    for (const auto& p : pairs)
        if (p.first >= v_min && p.first <= v_max) inside.push_back(p);
    const auto n_data = static_cast<Eigen::Index>(inside.size());
    Eigen::MatrixXd a(n_data, k);
    Eigen::VectorXd b(n_data);
    for (Eigen::Index i = 0; i < n_data; ++i) {
        basis_row(inside[static_cast<std::size_t>(i)].first, v0, dv, k, a.row(i));
        b(i) = inside[static_cast<std::size_t>(i)].second / scale;
    }

    QuadraticProgram qp;
    const double weight = 1.0 / static_cast<double>(std::max<Eigen::Index>(n_data, 1));
    qp.hessian = a.transpose() * a * weight;
    const double curvature = std::max(1.0, qp.hessian.trace() / k);
    qp.hessian.diagonal().array() += 1e-14 * curvature;
    qp.linear = -a.transpose() * b * weight;
    // (y[i+1] - y[i]) / dv in [slope_floor, 0]
    qp.ineq = Eigen::MatrixXd::Zero(2 * (k - 1), k);
    qp.ineq_rhs.resize(2 * (k - 1));
    for (int i = 0; i + 1 < k; ++i) {
        qp.ineq(2 * i, i + 1) = 1.0;
        qp.ineq(2 * i, i) = -1.0;
        qp.ineq_rhs(2 * i) = 0.0;
        qp.ineq(2 * i + 1, i + 1) = -1.0;
        qp.ineq(2 * i + 1, i) = 1.0;
        qp.ineq_rhs(2 * i + 1) = -o.slope_floor * dv / scale;
    }
    qp.eq = Eigen::MatrixXd::Zero(2, k);
    basis_row(v_min, v0, dv, k, qp.eq.row(0));
    basis_row(v_max, v0, dv, k, qp.eq.row(1));
    qp.eq_rhs.resize(2);
    qp.eq_rhs << q_max / scale, q_min / scale;

    // The dual iteration runs on a better conditioned copy (stronger ridge);
    // its multipliers seed the exact active-set refinement.
    QuadraticProgram conditioned = qp;
    conditioned.hessian.diagonal().array() += 1e-6 * curvature;
    const auto approx = solve_dual_ascent(conditioned, o.qp);
    const auto exact = refine(qp, approx);
    if (!exact) throw NumericalError("fit_curve: constrained least squares did not converge");
    const Eigen::VectorXd& y = *exact;

    MlDroopCurve curve;
    curve.beta = o.beta;
    curve.slope_floor = o.slope_floor;
    curve.q_min = q_min;
    curve.q_max = q_max;
    for (int i = 0; i < k; ++i) curve.breakpoints.emplace_back(v0 + i * dv, y(i) * scale);
    return curve;
}

std::vector<MlDroopCurve> fit_all(const Network& network, const TrainingSet& training, const FitOptions& options) {
    std::vector<MlDroopCurve> curves;
    for (const auto& inv : network.inverters) {
        auto c = fit_curve(training.pairs_for(inv.bus), inv.q_min_kvar, inv.q_max_kvar, network.v_min, network.v_max,
                           options);
        c.inverter_bus = inv.bus;
        curves.push_back(std::move(c));
    }
    return curves;
}

std::vector<std::string> check_curve(const MlDroopCurve& c, double v_min, double v_max, double tol) {
    std::vector<std::string> problems;
    const std::string who = "curve at bus " + std::to_string(c.inverter_bus) + ": ";
    if (c.breakpoints.size() < 2) problems.push_back(who + "fewer than two breakpoints");
    for (std::size_t i = 1; i < c.breakpoints.size(); ++i)
        if (!(c.breakpoints[i].first > c.breakpoints[i - 1].first))
            problems.push_back(who + "breakpoints not strictly increasing");
    const auto slopes = c.slopes();
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        const double run = c.breakpoints[i + 1].first - c.breakpoints[i].first;
        // Slope bound checked on the rise so the tolerance stays in kVAr.
        if (slopes[i] * run > tol || slopes[i] * run < c.slope_floor * run - tol)
            problems.push_back(who + "segment " + std::to_string(i) + " slope " + std::to_string(slopes[i]) +
                               " outside [" + std::to_string(c.slope_floor) + ", 0]");
    }
    if (std::abs(c.eval(v_min) - c.q_max) > tol) problems.push_back(who + "does not pass through (v_min, q_max)");
    if (std::abs(c.eval(v_max) - c.q_min) > tol) problems.push_back(who + "does not pass through (v_max, q_min)");
    return problems;
}

double fit_rms(const MlDroopCurve& curve, const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) return 0.0;
    double ss = 0.0;
    for (const auto& [v, q] : pairs) {
        const double e = curve.eval(v) - q;
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(pairs.size()));
}

namespace {

void append_double(std::string& out, double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, ptr);
}

template <typename T>
T parse_field(std::string_view s, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("invalid number '" + std::string(s) + "'", line);
    return value;
}

}  // namespace

std::string training_to_csv(const TrainingSet& training) {
    std::string out = "timestamp,inverter_bus,v_pu,q_kvar\n";
    for (const auto& s : training.samples) {
        out += std::to_string(s.timestamp) + ',' + std::to_string(s.inverter_bus) + ',';
        append_double(out, s.v_pu);
        out += ',';
        append_double(out, s.q_kvar);
        out += '\n';
    }
    return out;
}

TrainingSet training_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "timestamp,inverter_bus,v_pu,q_kvar")
        throw ParseError("expected header 'timestamp,inverter_bus,v_pu,q_kvar'", 1);
    TrainingSet set;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
            f.push_back(rest.substr(0, pos));
        f.push_back(rest);
        if (f.size() != 4) throw ParseError("expected 4 fields", line_no);
        set.samples.push_back({parse_field<std::int64_t>(f[0], line_no), parse_field<int>(f[1], line_no),
                               parse_field<double>(f[2], line_no), parse_field<double>(f[3], line_no)});
    }
    return set;
}

std::string curve_to_json(const MlDroopCurve& c) {
    nlohmann::ordered_json j;
    j["inverter_bus"] = c.inverter_bus;
    auto bps = nlohmann::ordered_json::array();
    for (const auto& [v, q] : c.breakpoints) bps.push_back({v, q});
    j["breakpoints"] = bps;
    j["beta"] = c.beta;
    j["slope_floor"] = c.slope_floor;
    j["q_min"] = c.q_min;
    j["q_max"] = c.q_max;
    return j.dump(2) + "\n";
}

MlDroopCurve curve_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        MlDroopCurve c;
        c.inverter_bus = j.at("inverter_bus").get<int>();
        for (const auto& bp : j.at("breakpoints")) {
            if (!bp.is_array() || bp.size() != 2) throw ParseError("curve: breakpoints must be [v, q] pairs");
            c.breakpoints.emplace_back(bp[0].get<double>(), bp[1].get<double>());
        }
        if (c.breakpoints.size() < 2) throw ParseError("curve: need at least two breakpoints");
        c.beta = j.at("beta").get<double>();
        c.slope_floor = j.at("slope_floor").get<double>();
        double lo = c.breakpoints.front().second, hi = lo;
        for (const auto& [v, q] : c.breakpoints) {
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        c.q_min = j.contains("q_min") ? j["q_min"].get<double>() : std::min(lo, 0.0);
        c.q_max = j.contains("q_max") ? j["q_max"].get<double>() : std::max(hi, 0.0);
        if (!(c.beta > 0.0 && c.beta <= 1.0)) throw ParseError("curve: beta must lie in (0, 1]");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("curve: ") + e.what());
    }
}

}  // namespace vvc
