#include "aekmu/foxh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <ostream>
#include <thread>

#include "aekmu/errors.hpp"
#include "aekmu/quadrature.hpp"
#include "aekmu/specfun.hpp"

namespace aekmu::foxh {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;
constexpr int kMaxVars = 4;

int g_default_threads = 0;

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (g_default_threads > 0) return g_default_threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

struct FlatFactor {
    double offset;
    double w[kMaxVars];
    int power;
    int deepest; // axis order index at which all touched axes are fixed
};

struct FlatRational { // multiply by 1/(offset + w.s)
    double offset;
    double w[kMaxVars];
    int deepest;
};

struct FlatIncGamma { // multiply by gamma(offset + w.s, x) * x^{-(offset + w.s)}
    double offset;
    double w[kMaxVars];
    double x, lnx;
    int deepest;
};

// Integrand after rational collapse, with axis evaluation order attached.
struct Prepared {
    int nvars;
    std::vector<double> lnz;
    std::vector<FlatFactor> gammas;       // coupled (>= 2 axes) gamma factors
    std::vector<FlatRational> rationals;
    std::vector<FlatIncGamma> incgammas;
    // single-axis gamma factors, grouped per axis (cached per node)
    std::vector<std::vector<FlatFactor>> axis_gammas;
    std::vector<int> order; // axis evaluation order, outermost first
};

int count_touched(const GammaFactor& f) {
    int n = 0;
    for (double w : f.weights)
        if (w != 0.0) ++n;
    return n;
}

// Gamma(w)/Gamma(w+1) pairs collapse to the rational 1/w; this both removes a
// catastrophic lgamma cancellation and most of the per-node cost.
void collapse_rationals(std::vector<GammaFactor>& gammas, std::vector<FlatRational>& rationals,
                        int nvars) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < gammas.size() && !changed; ++i) {
            if (gammas[i].power != +1) continue;
            for (std::size_t j = 0; j < gammas.size(); ++j) {
                if (gammas[j].power != -1) continue;
                if (gammas[j].weights != gammas[i].weights) continue;
                if (std::abs(gammas[j].offset - gammas[i].offset - 1.0) > 1e-13) continue;
                FlatRational r{};
                r.offset = gammas[i].offset;
                for (int k = 0; k < nvars; ++k) r.w[k] = gammas[i].weights[k];
                rationals.push_back(r);
                gammas.erase(gammas.begin() + std::max(i, j));
                gammas.erase(gammas.begin() + std::min(i, j));
                changed = true;
                break;
            }
        }
    }
}

// exponential decay rate (per unit |t|) of a vertical contour on this axis
double vertical_rate(const std::vector<GammaFactor>& gammas, int axis) {
    double r = 0.0;
    for (const auto& f : gammas)
        if (f.touches(axis)) r += f.power * std::abs(f.weights[axis]);
    return 0.5 * kPi * r;
}

// superexponential weight (units of lgamma) of the right-loop legs; > 0 decays
double loop_decay(const std::vector<GammaFactor>& gammas, int axis) {
    // numerator gammas with negative weight and denominator gammas with
    // positive weight both shrink as Re s -> +infinity; the net lgamma weight
    // is -power * beta per factor
    double d = 0.0;
    for (const auto& f : gammas)
        if (f.touches(axis)) d -= f.power * f.weights[axis];
    return d;
}

bool is_right_ladder(const GammaFactor& f, int axis) {
    if (f.power != +1 || !f.touches(axis)) return false;
    for (double w : f.weights)
        if (w > 0.0) return false;
    return f.weights[axis] < 0.0;
}

bool is_left_numerator(const GammaFactor& f) {
    if (f.power != +1) return false;
    bool has_pos = false;
    for (double w : f.weights) {
        if (w > 0.0) has_pos = true;
        if (w < 0.0) return false;
    }
    return has_pos;
}

Prepared prepare(const GammaProductIntegrand& in, const ContourPlan& plan) {
    Prepared p;
    p.nvars = in.nvars;
    p.lnz.resize(in.nvars);
    for (int i = 0; i < in.nvars; ++i) p.lnz[i] = std::log(in.arguments[i]);

    std::vector<GammaFactor> gam = in.factors;
    collapse_rationals(gam, p.rationals, in.nvars);

    p.axis_gammas.resize(in.nvars);
    for (const auto& f : gam) {
        const int touched = count_touched(f);
        FlatFactor ff{};
        ff.offset = f.offset;
        ff.power = f.power;
        for (int k = 0; k < in.nvars; ++k) ff.w[k] = f.weights[k];
        if (touched <= 1) {
            int ax = 0;
            for (int k = 0; k < in.nvars; ++k)
                if (f.weights[k] != 0.0) ax = k;
            p.axis_gammas[ax].push_back(ff);
        } else {
            p.gammas.push_back(ff);
        }
    }
    for (const auto& f : in.incgamma_factors) {
        FlatIncGamma g{};
        g.offset = f.offset;
        for (int k = 0; k < in.nvars; ++k) g.w[k] = k < (int)f.weights.size() ? f.weights[k] : 0.0;
        g.x = f.x;
        g.lnx = std::log(f.x);
        p.incgammas.push_back(g);
    }

    // order axes so coupled factors complete as early as possible: put the
    // most-coupled axes innermost only when forced; heuristic: sort by the
    // number of coupled factors whose completion the axis can trigger
    p.order.resize(in.nvars);
    for (int i = 0; i < in.nvars; ++i) p.order[i] = i;
    // keep natural order but move axes that appear only in all-axis factors last
    std::stable_sort(p.order.begin(), p.order.end(), [&](int a, int b) {
        auto coupled_count = [&](int ax) {
            int c = 0;
            for (const auto& f : p.gammas)
                if (f.w[ax] != 0.0) ++c;
            return c;
        };
        return coupled_count(a) > coupled_count(b);
    });

    // deepest position (in evaluation order) of each coupled factor
    auto depth_of_axis = [&](int ax) {
        for (int d = 0; d < in.nvars; ++d)
            if (p.order[d] == ax) return d;
        return in.nvars - 1;
    };
    auto set_deepest = [&](auto& f) {
        int d = 0;
        for (int ax = 0; ax < in.nvars; ++ax)
            if (f.w[ax] != 0.0) d = std::max(d, depth_of_axis(ax));
        f.deepest = d;
    };
    for (auto& f : p.gammas) set_deepest(f);
    for (auto& f : p.rationals) set_deepest(f);
    for (auto& f : p.incgammas) set_deepest(f);
    return p;
}

// ------------------------------------------------------------------
// node construction

struct AxisNodes {
    std::vector<Complex> s;
    std::vector<Complex> wmul;   // quadrature weight including ds/(2*pi*i)
    std::vector<double> profile; // log-magnitude proxy for tails and pruning
    double extent = 0.0;         // T (vertical) or leg length (loop)
    double profile_max = -1e308;
    double tail_share = 0.0;     // profile mass within the outer 1/8 of the extent
};

struct AxisConfig {
    AxisPath path;
    double c;
    double extent;  // T or loop leg length
    double density; // nodes per unit (vertical) / panels per unit (loop)
};

// growth rate of the coupled-factor product along this axis, evaluated with
// the other axes pinned at their abscissas; keeps the tail proxy conservative
double coupled_profile(const Prepared& p, const std::vector<double>& absc, int axis, Complex s) {
    double r = 0.0;
    for (const auto& f : p.gammas) {
        if (f.w[axis] == 0.0) continue;
        Complex arg(f.offset, 0.0);
        for (int k = 0; k < p.nvars; ++k) arg += f.w[k] * (k == axis ? s : Complex(absc[k], 0.0));
        r += f.power * specfun::log_gamma(arg).real();
    }
    return r;
}

double uncoupled_log_mag(const Prepared& p, int axis, Complex s) {
    double r = s.real() * p.lnz[axis];
    for (const auto& f : p.axis_gammas[axis])
        r += f.power * specfun::log_gamma(Complex(f.offset, 0.0) + f.w[axis] * s).real();
    return r;
}

Complex uncoupled_log(const Prepared& p, int axis, Complex s) {
    Complex r = s * p.lnz[axis];
    for (const auto& f : p.axis_gammas[axis])
        r += static_cast<double>(f.power) *
             specfun::log_gamma(Complex(f.offset, 0.0) + f.w[axis] * s);
    return r;
}

AxisNodes build_vertical(const AxisConfig& cfg) {
    AxisNodes out;
    out.extent = cfg.extent;
    const double dt = 1.0 / cfg.density;
    const long k_max = std::lround(std::ceil(cfg.extent * cfg.density));
    out.s.reserve(2 * k_max + 1);
    for (long k = -k_max; k <= k_max; ++k) {
        const Complex s(cfg.c, k * dt);
        double w = dt / (2.0 * kPi);
        if (k == -k_max || k == k_max) w *= 0.5; // trapezoid ends
        out.s.push_back(s);
        out.wmul.push_back(Complex(w, 0.0));
    }
    return out;
}

AxisNodes build_loop(const AxisConfig& cfg, double h) {
    // clockwise rectangular loop: upper leg right-to-left, cap downward,
    // lower leg left-to-right; equals the vertical line closed to the right
    AxisNodes out;
    out.extent = cfg.extent;
    const Complex inv_2pii(0.0, -1.0 / (2.0 * kPi)); // 1/(2*pi*i)
    const auto& rule = quad::gauss_legendre(6);
    // density counts nodes per unit length; each panel carries one 6-pt rule
    const double panel = rule.nodes.size() / cfg.density;

    auto add_segment = [&](Complex s0, Complex dir, double length, Complex ds_du) {
        const int npanels = std::max(1, (int)std::ceil(length / panel));
        const double plen = length / npanels;
        for (int pi = 0; pi < npanels; ++pi) {
            const double a = pi * plen;
            for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                const double u = a + 0.5 * plen * (1.0 + rule.nodes[g]);
                out.s.push_back(s0 + u * dir);
                out.wmul.push_back(0.5 * plen * rule.weights[g] * ds_du * inv_2pii);
            }
        }
    };
    const double L = cfg.extent;
    // upper leg: s = (c + L - u) + ih, ds/du = -1
    add_segment(Complex(cfg.c + L, h), Complex(-1.0, 0.0), L, Complex(-1.0, 0.0));
    // cap: s = c + i(h - u), ds/du = -i
    add_segment(Complex(cfg.c, h), Complex(0.0, -1.0), 2.0 * h, Complex(0.0, -1.0));
    // lower leg: s = (c + u) - ih, ds/du = +1
    add_segment(Complex(cfg.c, -h), Complex(1.0, 0.0), L, Complex(1.0, 0.0));
    return out;
}

void finish_axis(const Prepared& p, const std::vector<double>& absc, int axis, AxisNodes& ax,
                 AxisPath path, double c) {
    const std::size_t n = ax.s.size();
    ax.profile.resize(n);
    double pmax = -1e308;
    for (std::size_t i = 0; i < n; ++i) {
        const double lp = uncoupled_log_mag(p, axis, ax.s[i]) +
                          coupled_profile(p, absc, axis, ax.s[i]) +
                          std::log(std::abs(ax.wmul[i]) + 1e-300);
        ax.profile[i] = lp;
        pmax = std::max(pmax, lp);
    }
    ax.profile_max = pmax;
    // tail share: profile mass beyond 7/8 of the extent
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::exp(ax.profile[i] - pmax);
        total += m;
        const double along = (path == AxisPath::VerticalLine) ? std::abs(ax.s[i].imag())
                                                              : (ax.s[i].real() - c);
        if (along > 0.875 * ax.extent) tail += m;
    }
    ax.tail_share = (total > 0.0) ? tail / total : 0.0;
}

// ------------------------------------------------------------------
// tensor pass

struct PassResult {
    Complex sum{0.0, 0.0};
    double mag = 0.0;
    std::uint64_t nodes = 0;
};

struct TensorCtx {
    const Prepared* prep;
    std::vector<AxisNodes> axes;           // in evaluation order
    std::vector<std::vector<Complex>> ulog; // per depth, per node
    std::vector<double> rem_profile_max;    // sum of profile maxima for depths > d
    double prune_cut = -1e308;              // log threshold; -inf disables
    // factors grouped by completion depth
    std::vector<std::vector<const FlatFactor*>> gam_at;
    std::vector<std::vector<const FlatRational*>> rat_at;
    std::vector<std::vector<const FlatIncGamma*>> inc_at;
};

void descend(const TensorCtx& ctx, int depth, Complex s_fixed[kMaxVars], Complex clog,
             Complex cmul, PassResult& acc, std::size_t i_begin, std::size_t i_end) {
    const Prepared& p = *ctx.prep;
    const auto& ax = ctx.axes[depth];
    const int axis = p.order[depth];
    const bool last = depth == p.nvars - 1;
    for (std::size_t i = i_begin; i < i_end; ++i) {
        Complex cl = clog + ctx.ulog[depth][i];
        Complex cm = cmul * ax.wmul[i];
        s_fixed[axis] = ax.s[i];
        for (const FlatFactor* f : ctx.gam_at[depth]) {
            Complex arg(f->offset, 0.0);
            for (int k = 0; k < p.nvars; ++k)
                if (f->w[k] != 0.0) arg += f->w[k] * s_fixed[k];
            cl += static_cast<double>(f->power) * specfun::log_gamma(arg);
        }
        for (const FlatRational* f : ctx.rat_at[depth]) {
            Complex arg(f->offset, 0.0);
            for (int k = 0; k < p.nvars; ++k)
                if (f->w[k] != 0.0) arg += f->w[k] * s_fixed[k];
            cm /= arg;
        }
        for (const FlatIncGamma* f : ctx.inc_at[depth]) {
            Complex w(f->offset, 0.0);
            for (int k = 0; k < p.nvars; ++k)
                if (f->w[k] != 0.0) w += f->w[k] * s_fixed[k];
            cl += specfun::log_gamma(w) - w * f->lnx;
            cm *= specfun::gamma_p_complex(w, f->x);
        }
        if (last) {
            const Complex v = std::exp(cl) * cm;
            acc.sum += v;
            acc.mag += std::abs(v);
            ++acc.nodes;
        } else {
            if (ctx.prune_cut > -1e307) {
                const double bound =
                    cl.real() + std::log(std::abs(cm) + 1e-300) + ctx.rem_profile_max[depth];
                if (bound < ctx.prune_cut) continue;
            }
            descend(ctx, depth + 1, s_fixed, cl, cm, acc, 0, ctx.axes[depth + 1].s.size());
        }
    }
}

PassResult tensor_pass(const TensorCtx& ctx, int threads) {
    const std::size_t n0 = ctx.axes[0].s.size();
    constexpr std::size_t kBlock = 8;
    const std::size_t nblocks = (n0 + kBlock - 1) / kBlock;
    std::vector<PassResult> partial(nblocks);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            Complex s_fixed[kMaxVars];
            descend(ctx, 0, s_fixed, Complex(0.0, 0.0), Complex(1.0, 0.0), partial[b],
                    b * kBlock, std::min(n0, (b + 1) * kBlock));
        }
    };
    const int nt = std::max(1, std::min<int>(threads, (int)nblocks));
    if (nt == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (int t = 0; t < nt; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    // fixed-order reduction: independent of worker count
    PassResult total;
    double c_re = 0.0, c_im = 0.0; // Kahan
    for (const auto& pr : partial) {
        auto add = [](double& s, double& c, double x) {
            const double y = x - c;
            const double t = s + y;
            c = (t - s) - y;
            s = t;
        };
        double sre = total.sum.real(), sim = total.sum.imag();
        add(sre, c_re, pr.sum.real());
        add(sim, c_im, pr.sum.imag());
        total.sum = Complex(sre, sim);
        total.mag += pr.mag;
        total.nodes += pr.nodes;
    }
    return total;
}

// ------------------------------------------------------------------

void check_integrand(const GammaProductIntegrand& in) {
    if (in.nvars < 1 || in.nvars > kMaxVars)
        throw DimensionCap("foxh: nvars must be between 1 and 4");
    if ((int)in.arguments.size() != in.nvars)
        throw DomainError("foxh: argument count must equal nvars");
    for (double z : in.arguments)
        if (!(z > 0.0) || !std::isfinite(z))
            throw DomainError("foxh: arguments must be positive and finite");
    for (const auto& f : in.factors) {
        if ((int)f.weights.size() != in.nvars)
            throw DomainError("foxh: factor weight count must equal nvars");
        if (f.power != 1 && f.power != -1) throw DomainError("foxh: factor power must be +-1");
    }
    for (int ax = 0; ax < in.nvars; ++ax) {
        bool ok = false;
        for (const auto& f : in.factors) ok = ok || is_right_ladder(f, ax);
        if (!ok)
            throw DomainError(
                "foxh: every variable needs a right-ladder factor (Gamma(-s_i) form), axis " +
                std::to_string(ax));
    }
}

std::string factor_name(const GammaFactor& f) {
    std::string s = f.power > 0 ? "Gamma(" : "1/Gamma(";
    s += std::to_string(f.offset);
    for (std::size_t k = 0; k < f.weights.size(); ++k)
        if (f.weights[k] != 0.0)
            s += (f.weights[k] > 0 ? " +" : " ") + std::to_string(f.weights[k]) + "*s" +
                 std::to_string(k + 1);
    return s + ")";
}

} // namespace

void set_default_threads(int n) { g_default_threads = n; }
int default_threads() { return resolve_threads(0); }

ContourPlan plan_contour(const GammaProductIntegrand& in) {
    check_integrand(in);
    ContourPlan plan;
    plan.abscissas.assign(in.nvars, -0.25);
    plan.paths.assign(in.nvars, AxisPath::VerticalLine);

    // default abscissa: c_i = -min(1/4, d_i/3), d_i the projected distance to
    // the nearest left-ladder pole
    for (int ax = 0; ax < in.nvars; ++ax) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& f : in.factors) {
            if (!is_left_numerator(f) || !f.touches(ax)) continue;
            if (f.offset <= 0.0)
                throw NoValidContour("plan_contour: left ladder reaches Re >= 0 in " +
                                     factor_name(f));
            d = std::min(d, f.offset / f.weights[ax]);
        }
        for (const auto& f : in.incgamma_factors) {
            if (ax < (int)f.weights.size() && f.weights[ax] > 0.0) {
                if (f.offset <= 0.0)
                    throw NoValidContour("plan_contour: incomplete-gamma ladder reaches Re >= 0");
                d = std::min(d, f.offset / f.weights[ax]);
            }
        }
        plan.abscissas[ax] = -std::min(0.25, d / 3.0);
    }

    // joint repair: shrink towards the origin until every numerator argument
    // keeps a strictly positive real part at the intersection point
    auto violated = [&]() -> const GammaFactor* {
        for (const auto& f : in.factors) {
            if (f.power != +1) continue;
            double arg = f.offset;
            for (int k = 0; k < in.nvars; ++k) arg += f.weights[k] * plan.abscissas[k];
            if (arg <= 1e-9) return &f;
        }
        return nullptr;
    };
    auto inc_violated = [&]() {
        for (const auto& f : in.incgamma_factors) {
            double arg = f.offset;
            for (int k = 0; k < in.nvars && k < (int)f.weights.size(); ++k)
                arg += f.weights[k] * plan.abscissas[k];
            if (arg <= 1e-9) return true;
        }
        return false;
    };
    int iter = 0;
    while (violated() != nullptr || inc_violated()) {
        if (++iter > 120) {
            const GammaFactor* f = violated();
            std::string msg = "plan_contour: cannot separate pole ladders";
            if (f) msg += "; violating factor " + factor_name(*f);
            throw NoValidContour(msg);
        }
        for (double& c : plan.abscissas) c *= 0.7;
    }

    // contour shape per axis: vertical when the weighted gamma balance decays,
    // otherwise the right loop (entire-type axis, empty Mellin strip)
    std::vector<GammaFactor> gam = in.factors;
    std::vector<FlatRational> dummy;
    collapse_rationals(gam, dummy, in.nvars);
    for (int ax = 0; ax < in.nvars; ++ax) {
        if (vertical_rate(gam, ax) > 1e-9) {
            plan.paths[ax] = AxisPath::VerticalLine;
        } else if (loop_decay(gam, ax) > 1e-9) {
            plan.paths[ax] = AxisPath::RightLoop;
        } else {
            throw NoValidContour("plan_contour: axis " + std::to_string(ax + 1) +
                                 " has no convergent contour (zero balance)");
        }
    }
    validate_contour(in, plan);
    return plan;
}

void validate_contour(const GammaProductIntegrand& in, const ContourPlan& plan) {
    check_integrand(in);
    if ((int)plan.abscissas.size() != in.nvars || (int)plan.paths.size() != in.nvars)
        throw ContourViolation("validate_contour: plan size mismatch");
    for (const auto& f : in.factors) {
        if (f.power != +1) continue;
        double arg = f.offset;
        for (int k = 0; k < in.nvars; ++k) arg += f.weights[k] * plan.abscissas[k];
        if (arg <= 0.0)
            throw ContourViolation("validate_contour: nonpositive Re at intersection in " +
                                   factor_name(f));
    }
    for (const auto& f : in.incgamma_factors) {
        double arg = f.offset;
        for (int k = 0; k < in.nvars && k < (int)f.weights.size(); ++k)
            arg += f.weights[k] * plan.abscissas[k];
        if (arg <= 0.0)
            throw ContourViolation("validate_contour: incomplete-gamma order nonpositive");
        if (!(f.x > 0.0)) throw ContourViolation("validate_contour: incomplete-gamma x <= 0");
    }
    for (int ax = 0; ax < in.nvars; ++ax) {
        if (plan.abscissas[ax] >= 0.0)
            throw ContourViolation("validate_contour: abscissa must sit left of the right ladder");
    }
    if (plan.loop_height <= 0.0 || plan.loop_height >= 1.0)
        throw ContourViolation("validate_contour: loop height must lie in (0,1)");
}

double evaluate(const GammaProductIntegrand& in, const ContourPlan& plan, double tol,
                const EvalOptions& opts, EvalStats* stats) {
    validate_contour(in, plan);
    if (!(tol > 0.0)) throw DomainError("foxh::evaluate: tol must be > 0");
    Prepared prep = prepare(in, plan);

    // initial extents from the decay analysis
    std::vector<GammaFactor> gam = in.factors;
    std::vector<FlatRational> dummy;
    collapse_rationals(gam, dummy, in.nvars);
    std::vector<AxisConfig> cfg(in.nvars);
    const double logtol = std::log(tol);
    for (int ax = 0; ax < in.nvars; ++ax) {
        cfg[ax].path = plan.paths[ax];
        cfg[ax].c = plan.abscissas[ax];
        if (plan.paths[ax] == AxisPath::VerticalLine) {
            const double rate = vertical_rate(gam, ax);
            const double need = (-logtol + 8.0) / std::max(rate, 0.2);
            cfg[ax].extent = std::min(std::max(6.0, need), std::max(plan.half_length, 6.0));
            cfg[ax].density = std::max(6, plan.nodes_per_unit / 2);
        } else {
            const double dw = loop_decay(gam, ax);
            const double lnz = std::log(in.arguments[ax < (int)in.arguments.size() ? ax : 0]);
            double sig = 6.0;
            while (sig < 400.0 &&
                   sig * lnz - dw * std::lgamma(sig + 1.0) > logtol - 23.0)
                sig += 4.0;
            cfg[ax].extent = sig - plan.abscissas[ax];
            cfg[ax].density = plan.loop_nodes_per_unit;
        }
    }

    EvalStats st{};
    Complex prev(0.0, 0.0);
    bool have_prev = false;
    double mag = 0.0;
    Complex val(0.0, 0.0);
    int tail_ok_streak = 0;

    for (int round = 0; round < opts.max_rounds; ++round) {
        TensorCtx ctx;
        ctx.prep = &prep;
        ctx.axes.resize(in.nvars);
        ctx.ulog.resize(in.nvars);
        std::uint64_t total_nodes = 1;
        for (int d = 0; d < in.nvars; ++d) {
            const int axis = prep.order[d];
            ctx.axes[d] = (cfg[axis].path == AxisPath::VerticalLine)
                              ? build_vertical(cfg[axis])
                              : build_loop(cfg[axis], plan.loop_height);
            finish_axis(prep, plan.abscissas, axis, ctx.axes[d], cfg[axis].path, cfg[axis].c);
            ctx.ulog[d].resize(ctx.axes[d].s.size());
            for (std::size_t i = 0; i < ctx.axes[d].s.size(); ++i)
                ctx.ulog[d][i] = uncoupled_log(prep, axis, ctx.axes[d].s[i]);
            total_nodes *= ctx.axes[d].s.size();
        }
        if (total_nodes > 6'000'000'000ULL)
            throw NoConvergence("foxh::evaluate: node budget exhausted");

        ctx.rem_profile_max.assign(in.nvars, 0.0);
        for (int d = in.nvars - 2; d >= 0; --d)
            ctx.rem_profile_max[d] = ctx.rem_profile_max[d + 1] + ctx.axes[d + 1].profile_max;
        ctx.prune_cut = have_prev && std::abs(prev) > 0.0
                            ? std::log(tol * std::abs(prev)) - 40.0
                            : -1e308;
        ctx.gam_at.assign(in.nvars, {});
        ctx.rat_at.assign(in.nvars, {});
        ctx.inc_at.assign(in.nvars, {});
        for (const auto& f : prep.gammas) ctx.gam_at[f.deepest].push_back(&f);
        for (const auto& f : prep.rationals) ctx.rat_at[f.deepest].push_back(&f);
        for (const auto& f : prep.incgammas) ctx.inc_at[f.deepest].push_back(&f);

        PassResult r = tensor_pass(ctx, resolve_threads(opts.threads));
        st.rounds = round + 1;
        st.nodes += r.nodes;
        val = r.sum;
        mag = r.mag;
        if (opts.debug) {
            *opts.debug << "foxh round " << round + 1 << ": value = " << val.real() << " + "
                        << val.imag() << "i, |sum| mass = " << mag << ", nodes = " << r.nodes
                        << "\n";
        }

        // tails first: "doubled until the tail panel magnitude is small twice in a row"
        bool tails_bad = false;
        for (int d = 0; d < in.nvars; ++d) {
            const int axis = prep.order[d];
            if (ctx.axes[d].tail_share > 0.02 * tol) {
                cfg[axis].extent *= (cfg[axis].path == AxisPath::VerticalLine) ? 1.6 : 1.0;
                if (cfg[axis].path == AxisPath::RightLoop) cfg[axis].extent += 8.0;
                tails_bad = true;
            }
        }
        if (tails_bad) {
            tail_ok_streak = 0;
            have_prev = false; // geometry changed; density comparison restarts
            continue;
        }
        ++tail_ok_streak;
        if (have_prev && tail_ok_streak >= 2) {
            const double scale = std::max(std::abs(val), 1e-300);
            const double imag_floor = 5e-15 * mag;
            const bool dens_ok = std::abs(val - prev) <= tol * scale;
            const bool imag_ok =
                std::abs(val.imag()) <= std::max(tol * std::abs(val.real()), imag_floor);
            if (dens_ok && imag_ok) {
                st.imag_residual = std::abs(val.imag()) / std::max(std::abs(val.real()), 1e-300);
                if (stats) *stats = st;
                return in.prefactor * val.real();
            }
        }
        prev = val;
        have_prev = true;
        for (int ax = 0; ax < in.nvars; ++ax) cfg[ax].density *= 2.0;
    }
    throw NoConvergence("foxh::evaluate: refinement budget exhausted");
}

void dump(const GammaProductIntegrand& in, const ContourPlan& plan, std::ostream& os) {
    os << "gamma-product integrand, nvars = " << in.nvars << ", prefactor = " << in.prefactor
       << "\n";
    for (const auto& f : in.factors) os << "  " << factor_name(f) << "\n";
    for (const auto& f : in.incgamma_factors) {
        os << "  incgamma(order " << f.offset;
        for (std::size_t k = 0; k < f.weights.size(); ++k)
            if (f.weights[k] != 0.0) os << " + " << f.weights[k] << "*s" << k + 1;
        os << ", x = " << f.x << ")\n";
    }
    os << "  arguments:";
    for (double z : in.arguments) os << " " << z;
    os << "\n  plan: c = [";
    for (std::size_t k = 0; k < plan.abscissas.size(); ++k)
        os << (k ? ", " : "") << plan.abscissas[k];
    os << "], paths = [";
    for (std::size_t k = 0; k < plan.paths.size(); ++k)
        os << (k ? ", " : "")
           << (plan.paths[k] == AxisPath::VerticalLine ? "vertical" : "loop");
    os << "], T0 = " << plan.half_length << ", npu = " << plan.nodes_per_unit << "\n";
}

} // namespace aekmu::foxh
