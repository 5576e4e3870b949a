#include "mtb/experiments.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "mtb/bounds.hpp"
#include "mtb/models.hpp"
#include "mtb/regression.hpp"
#include "mtb/verify.hpp"

namespace mtb {

namespace {

std::string normalize_kind(std::string s) {
    for (char& c : s)
        if (c == '-') c = '_';
    return s;
}

struct RunParams {
    std::uint64_t seed = 1;
    long reps = 10000;
    int threads = 0;
    double ci_level = 0.99;
};

RunParams read_run(const Config& cfg, const RunOverrides& overrides) {
    RunParams run;
    run.seed = overrides.seed.value_or(cfg.get_u64("run.seed", 1));
    run.reps = overrides.reps.value_or(cfg.get_long("run.reps", 10000));
    run.threads = overrides.threads.value_or(static_cast<int>(cfg.get_long("run.threads", 0)));
    run.ci_level = cfg.get_double("run.ci_level", 0.99);
    if (run.reps < 1) throw ConfigError(cfg.origin() + ": run.reps must be >= 1");
    if (!(run.ci_level > 0.0 && run.ci_level < 1.0))
        throw ConfigError(cfg.origin() + ": run.ci_level must be in (0,1)");
    return run;
}

ModelKind parse_model_kind(const Config& cfg, const std::string& text) {
    for (ModelKind k : {ModelKind::iid_subexp, ModelKind::iid_moment, ModelKind::self_normalized,
                        ModelKind::random_weighted, ModelKind::pnorm_weighted,
                        ModelKind::regression_driven})
        if (text == kind_name(k)) return k;
    throw ConfigError(cfg.origin() + ": unknown model kind '" + text + "'");
}

Statistic parse_statistic(const Config& cfg, const std::string& text) {
    for (Statistic s : {Statistic::final_sum, Statistic::abs_final, Statistic::max_partial,
                        Statistic::max_abs_partial})
        if (text == statistic_name(s)) return s;
    throw ConfigError(cfg.origin() + ": unknown statistic '" + text + "'");
}

std::vector<long> long_grid(const Config& cfg, const std::string& key) {
    std::vector<long> out;
    for (double v : cfg.get_grid(key)) {
        const long l = std::llround(v);
        if (static_cast<double>(l) != v)
            throw ConfigError(cfg.origin() + ": key '" + key + "' expects integers");
        out.push_back(l);
    }
    return out;
}

MartingaleModel read_model(const Config& cfg) {
    MartingaleModel m;
    m.kind = parse_model_kind(cfg, cfg.get_string("model.kind"));
    m.base = cfg.get_distribution("model.base", Normal{1.0});
    m.weight_law = cfg.get_distribution("model.weight_law", Normal{1.0});
    m.alpha = cfg.get_double("model.alpha", 0.5);
    m.p = cfg.get_double("model.p", 2.0);
    m.delta = cfg.get_double("model.delta", 0.5);
    m.n = static_cast<int>(cfg.get_long("model.n"));
    if (cfg.has("model.design")) m.design = cfg.get_grid("model.design");
    validate(m);
    return m;
}

std::string model_label(const MartingaleModel& m) {
    std::string label = kind_name(m.kind);
    switch (m.kind) {
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment:
        return label + "[" + distribution_spec(m.base) + "]";
    case ModelKind::self_normalized:
        return label + "[w=" + distribution_spec(m.weight_law) + "]";
    case ModelKind::random_weighted:
    case ModelKind::pnorm_weighted:
        return label + "[base=" + distribution_spec(m.base) +
               "; w=" + distribution_spec(m.weight_law) + "]";
    case ModelKind::regression_driven:
        return label + "[base=" + distribution_spec(m.base) +
               "; design=" + std::to_string(m.design.size()) + "pt]";
    }
    return label;
}

RegressionConfig read_regression(const Config& cfg) {
    RegressionConfig reg;
    reg.theta = cfg.get_double("regression.theta", 0.0);
    reg.n = static_cast<int>(cfg.get_long("regression.n"));
    reg.phi_law = cfg.get_distribution("regression.phi_law", Normal{1.0});
    reg.noise_law = cfg.get_distribution("regression.noise_law", Normal{1.0});
    validate(reg);
    return reg;
}

std::string regression_label(const RegressionConfig& reg) {
    return "regression[phi=" + distribution_spec(reg.phi_law) +
           "; noise=" + distribution_spec(reg.noise_law) + "]";
}

// --- hypothesis constants derived from the model -----------------------

// sup bound on the quadratic characteristic <S>_n
double auto_quad_sup(const MartingaleModel& m, const ModelConstants& mc, long n) {
    switch (m.kind) {
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment:
        return static_cast<double>(n) * mc.quad;
    case ModelKind::self_normalized:
        return 1.0; // the weights form a unit L2 vector and the sign has variance 1
    case ModelKind::random_weighted:
    case ModelKind::regression_driven:
        return mc.quad;
    case ModelKind::pnorm_weighted:
        // ||w||_2 <= ||w||_p = 1 when p <= 2; otherwise Hoelder gives n^{1-2/p}
        return mc.quad * (m.p <= 2.0 ? 1.0 : std::pow(static_cast<double>(n), 1.0 - 2.0 / m.p));
    }
    throw std::logic_error("auto_quad_sup: unknown kind");
}

// sum over steps of the sup conditional variance; only deterministic step
// moments (iid, fixed design) collapse this to the aggregate constant
double auto_quad_per_step(const MartingaleModel& m, const ModelConstants& mc, long n) {
    switch (m.kind) {
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment:
        return static_cast<double>(n) * mc.quad;
    case ModelKind::self_normalized:
        return static_cast<double>(n); // each normalized weight can reach 1
    case ModelKind::random_weighted:
    case ModelKind::pnorm_weighted:
        return static_cast<double>(n) * mc.quad; // |w_i| <= 1 step by step
    case ModelKind::regression_driven:
        return mc.quad; // deterministic design, equals the aggregate
    }
    throw std::logic_error("auto_quad_per_step: unknown kind");
}

// sup bound on the summed conditional p-th positive-part moments
double auto_pmom_sup(const MartingaleModel& m, const ModelConstants& mc, long n) {
    switch (m.kind) {
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment:
        return static_cast<double>(n) * mc.pos_pow;
    case ModelKind::self_normalized:
    case ModelKind::random_weighted:
        // sum |w_i|^p <= 1 for p >= 2 on the unit L2 sphere, n^{1-p/2} below it
        return mc.pos_pow *
               (m.p >= 2.0 ? 1.0 : std::pow(static_cast<double>(n), 1.0 - m.p / 2.0));
    case ModelKind::pnorm_weighted:
        return mc.pos_pow; // the weights form a unit Lp vector
    case ModelKind::regression_driven: {
        double norm2 = 0.0;
        for (double d : m.design) norm2 += d * d;
        double sum = 0.0;
        for (double d : m.design) sum += std::pow(std::abs(d) / std::sqrt(norm2), m.p);
        return mc.pos_pow * sum;
    }
    }
    throw std::logic_error("auto_pmom_sup: unknown kind");
}

double auto_pmom_per_step(const MartingaleModel& m, const ModelConstants& mc, long n) {
    switch (m.kind) {
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment:
    case ModelKind::self_normalized:
    case ModelKind::random_weighted:
    case ModelKind::pnorm_weighted:
        return static_cast<double>(n) * mc.pos_pow;
    case ModelKind::regression_driven:
        return auto_pmom_sup(m, mc, n); // deterministic design
    }
    throw std::logic_error("auto_pmom_per_step: unknown kind");
}

// sup bound on the exp-weighted quadratic characteristic
double auto_subexp_sum(const MartingaleModel& m, const ModelConstants& mc, long n) {
    switch (m.kind) {
    case ModelKind::self_normalized:
        return std::exp(1.0); // holds pathwise for this construction
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment:
        if (!mc.has_subexp)
            throw ConfigError("bound constant 'auto': the base law has no exp-weighted moment");
        return static_cast<double>(n) * mc.subexp;
    case ModelKind::random_weighted:
    case ModelKind::regression_driven:
        if (!mc.has_subexp)
            throw ConfigError("bound constant 'auto': the base law has no exp-weighted moment");
        return mc.subexp;
    case ModelKind::pnorm_weighted:
        throw ConfigError("the pnorm-weighted kind has no subexponential constants");
    }
    throw std::logic_error("auto_subexp_sum: unknown kind");
}

using AutoRule = std::function<double(const MartingaleModel&, const ModelConstants&, long)>;

// a bound constant: an explicit number, or "auto" resolved against the model
std::function<double(long)> const_or_auto(const Config& cfg, const std::string& key,
                                          const MartingaleModel* model,
                                          const std::optional<ModelConstants>& mc,
                                          const AutoRule& rule, bool& any_auto) {
    const bool is_auto = !cfg.has(key) || cfg.get_string(key) == "auto";
    if (!is_auto) {
        const double v = cfg.get_double(key);
        return [v](long) { return v; };
    }
    if (model == nullptr)
        throw ConfigError(cfg.origin() + ": bound constant '" + key +
                          "' is auto but there is no [model] section");
    any_auto = true;
    const MartingaleModel m = *model;
    const ModelConstants constants = *mc;
    return [m, constants, rule](long n) { return rule(m, constants, n); };
}

struct PathBound {
    std::string name;
    std::optional<double> alpha;
    std::optional<double> p;
    std::optional<double> delta;
    bool needs_n = false; // n enters the formula or an auto constant
    std::function<BoundResult(double, long)> eval;
};

PathBound resolve_path_bound(const Config& cfg, const MartingaleModel* model) {
    PathBound pb;
    pb.name = cfg.get_string("bound.name");
    std::optional<ModelConstants> mc;
    if (model != nullptr) mc = model_constants(*model);

    auto required_alpha = [&]() {
        if (cfg.has("bound.alpha")) return cfg.get_double("bound.alpha");
        if (model != nullptr) return model->alpha;
        throw ConfigError(cfg.origin() + ": '" + pb.name +
                          "' needs bound.alpha or a [model] section");
    };
    auto required_p = [&]() {
        if (cfg.has("bound.p")) return cfg.get_double("bound.p");
        if (model != nullptr) return model->p;
        throw ConfigError(cfg.origin() + ": '" + pb.name + "' needs bound.p or a [model] section");
    };

    if (pb.name == "two_regime" || pb.name == "rough_branchwise" || pb.name == "rough_unified") {
        const double alpha = required_alpha();
        pb.alpha = alpha;
        auto u_fn = const_or_auto(cfg, "bound.u", model, mc, auto_subexp_sum, pb.needs_n);
        if (pb.name == "two_regime") {
            auto cn_fn = const_or_auto(cfg, "bound.c_n", model, mc, auto_subexp_sum, pb.needs_n);
            pb.eval = [alpha, u_fn, cn_fn](double x, long n) {
                return subexp_tail_bound(x, SubexpParams{alpha, cn_fn(n), std::max(1.0, u_fn(n))});
            };
        } else {
            const bool unified = pb.name == "rough_unified";
            pb.eval = [alpha, u_fn, unified](double x, long n) {
                const double u = std::max(1.0, u_fn(n));
                RoughBounds rb = subexp_rough_bound(x, SubexpParams{alpha, u, u});
                return unified ? rb.unified : rb.branchwise;
            };
        }
        return pb;
    }

    if (pb.name == "iid_subexp") {
        if (model == nullptr ||
            (model->kind != ModelKind::iid_subexp && model->kind != ModelKind::iid_moment))
            throw ConfigError(cfg.origin() + ": 'iid_subexp' needs an i.i.d. [model] section");
        if (!mc->has_subexp)
            throw ConfigError(cfg.origin() +
                              ": 'iid_subexp' needs a base law with an exp-weighted moment");
        const double alpha = model->alpha;
        const double subexp_moment = mc->subexp;
        const double exp_moment = moment_oracle(model->base, ExpMoment{alpha, false});
        const std::string y_spec = cfg.get_string("bound.y", "x");
        double y_val = 0.0;
        if (y_spec != "x") y_val = cfg.get_double("bound.y");
        pb.alpha = alpha;
        pb.needs_n = true;
        pb.eval = [alpha, subexp_moment, exp_moment, y_spec, y_val](double x, long n) {
            const double y = y_spec == "x" ? x : y_val;
            return iid_subexp_bound(x, y, static_cast<double>(n), subexp_moment, alpha,
                                    exp_moment);
        };
        return pb;
    }

    if (pb.name == "fuk_nagaev" || pb.name == "fuk_nagaev_per_step") {
        const double p = required_p();
        pb.p = p;
        const bool per_step = pb.name == "fuk_nagaev_per_step";
        auto q_fn = const_or_auto(cfg, "bound.quad_sup", model, mc,
                                  per_step ? auto_quad_per_step : auto_quad_sup, pb.needs_n);
        auto w_fn = const_or_auto(cfg, "bound.pmom_sup", model, mc,
                                  per_step ? auto_pmom_per_step : auto_pmom_sup, pb.needs_n);
        pb.eval = [p, q_fn, w_fn, per_step](double x, long n) {
            const MomentParams par{p, q_fn(n), w_fn(n)};
            return per_step ? fuk_nagaev_per_step_bound(x, par) : fuk_nagaev_bound(x, par);
        };
        return pb;
    }

    if (pb.name == "bernstein" || pb.name == "bernstein_avg") {
        const double p = required_p();
        const double delta = cfg.has("bound.delta")
                                 ? cfg.get_double("bound.delta")
                                 : (model != nullptr ? model->delta : 0.5);
        pb.p = p;
        pb.delta = delta;
        // the truncated-moment sums are only derived automatically for the
        // i.i.d. kinds; anything else must state them explicitly
        AutoRule trunc_rule = [p, delta](const MartingaleModel& m, const ModelConstants&,
                                         long n) {
            if (m.kind != ModelKind::iid_subexp && m.kind != ModelKind::iid_moment)
                throw ConfigError("bound.trunc_sum: 'auto' is only defined for i.i.d. kinds");
            return static_cast<double>(n) * moment_oracle(m.base, AbsPow{p + delta});
        };
        auto trunc_fn =
            const_or_auto(cfg, "bound.trunc_sum", model, mc, trunc_rule, pb.needs_n);
        if (pb.name == "bernstein") {
            AutoRule v_rule = [](const MartingaleModel& m, const ModelConstants& c, long n) {
                return std::sqrt(auto_quad_sup(m, c, n));
            };
            auto v_fn = const_or_auto(cfg, "bound.v", model, mc, v_rule, pb.needs_n);
            pb.eval = [p, delta, v_fn, trunc_fn](double x, long n) {
                return bernstein_trunc_bound(x, v_fn(n), p, delta, trunc_fn(n));
            };
        } else {
            // the averaged variant keeps v a free parameter of the statement
            const double v = cfg.get_double("bound.v");
            AutoRule qc_rule = [p, delta](const MartingaleModel& m, const ModelConstants& c,
                                          long n) {
                if (m.kind != ModelKind::iid_subexp && m.kind != ModelKind::iid_moment)
                    throw ConfigError(
                        "bound.quad_char_moment: 'auto' is only defined for i.i.d. kinds");
                // <S>_n is deterministic for i.i.d. increments
                return std::pow(static_cast<double>(n) * c.quad, (p + delta) / 2.0);
            };
            auto qc_fn =
                const_or_auto(cfg, "bound.quad_char_moment", model, mc, qc_rule, pb.needs_n);
            pb.needs_n = true;
            pb.eval = [p, delta, v, trunc_fn, qc_fn](double x, long n) {
                return bernstein_trunc_avg_bound(x, v, static_cast<double>(n), p, delta,
                                                 trunc_fn(n), qc_fn(n));
            };
        }
        return pb;
    }

    throw ConfigError(cfg.origin() + ": unknown bound name '" + pb.name + "'");
}

struct RegBound {
    std::string name;
    std::optional<double> alpha;
    std::optional<double> p;
    std::optional<double> delta;
    std::function<BoundResult(double)> eval;
};

RegBound resolve_reg_bound(const Config& cfg, const RegressionConfig& reg) {
    RegBound rb;
    rb.name = cfg.get_string("bound.name");

    // noise-law moment, or the explicit key when the config pins it
    auto noise_const = [&](const std::string& key, const MomentFunctional& fn) {
        if (cfg.has(key) && cfg.get_string(key) != "auto") return cfg.get_double(key);
        return moment_oracle(reg.noise_law, fn);
    };

    if (rb.name == "subexp_branchwise" || rb.name == "subexp_unified") {
        const double alpha = cfg.get_double("bound.alpha", 0.5);
        rb.alpha = alpha;
        const double d_const = noise_const("bound.d_const", SubexpWeighted{alpha, true});
        const double u = cfg.get_double("bound.u", std::max(1.0, d_const));
        const bool unified = rb.name == "subexp_unified";
        rb.eval = [alpha, d_const, u, unified](double x) {
            RoughBounds rough = reg_bound_subexp(x, d_const, u, alpha);
            return unified ? rough.unified : rough.branchwise;
        };
        return rb;
    }
    if (rb.name == "weibull") {
        const double alpha = cfg.get_double("bound.alpha", 0.5);
        rb.alpha = alpha;
        if (!(alpha > 0.0 && alpha < 1.0))
            throw ConfigError(cfg.origin() + ": bound.alpha must be in (0,1)");
        const double e_const = noise_const("bound.e_const", Quad{});
        const double f_const =
            noise_const("bound.f_const", ExpMoment{alpha / (1.0 - alpha), true});
        const long n = reg.n;
        rb.eval = [n, e_const, f_const, alpha](double x) {
            return reg_bound_weibull(x, n, e_const, f_const, alpha);
        };
        return rb;
    }
    if (rb.name == "condmoment" || rb.name == "condmoment_per_step") {
        const double p = cfg.get_double("bound.p", 2.0);
        rb.p = p;
        const double a_const = noise_const("bound.a_const", AbsPow{p});
        if (rb.name == "condmoment") {
            rb.eval = [p, a_const](double x) { return reg_bound_condmoment(x, p, a_const); };
        } else {
            const long n = reg.n;
            rb.eval = [p, a_const, n](double x) {
                return reg_bound_condmoment_per_step(x, p, a_const, n);
            };
        }
        return rb;
    }
    if (rb.name == "moment") {
        const double p = cfg.get_double("bound.p", 2.0);
        const double delta = cfg.get_double("bound.delta", 0.5);
        rb.p = p;
        rb.delta = delta;
        const double a_const = noise_const("bound.a_const", Quad{});
        const double b_const = noise_const("bound.b_const", AbsPow{p + delta});
        rb.eval = [p, delta, a_const, b_const](double x) {
            return reg_bound_moment(x, p, delta, a_const, b_const);
        };
        return rb;
    }
    if (rb.name == "vonbahr") {
        const double p = cfg.get_double("bound.p", 1.5);
        rb.p = p;
        const double a_const = noise_const("bound.a_const", AbsPow{p});
        rb.eval = [p, a_const](double x) { return reg_bound_vonbahr(x, p, a_const); };
        return rb;
    }
    throw ConfigError(cfg.origin() + ": unknown regression bound '" + rb.name + "'");
}

ReportCell base_cell(const Report& rep, const RunParams& run) {
    ReportCell cell;
    cell.experiment = rep.experiment;
    cell.verdict = "N/A";
    cell.seed = run.seed;
    return cell;
}

// --- experiment drivers -------------------------------------------------

void run_bound_table(const Config& cfg, const RunParams& run, Report& rep) {
    std::optional<MartingaleModel> model;
    if (cfg.has("model.kind")) model = read_model(cfg);
    const PathBound pb = resolve_path_bound(cfg, model ? &*model : nullptr);
    const std::vector<double> xs = cfg.get_grid("grid.x");

    std::vector<std::optional<long>> ns;
    if (cfg.has("grid.n"))
        for (long n : long_grid(cfg, "grid.n")) ns.emplace_back(n);
    else if (model)
        ns.emplace_back(model->n);
    else
        ns.emplace_back(std::nullopt);
    if (pb.needs_n)
        for (const auto& n : ns)
            if (!n)
                throw ConfigError(cfg.origin() + ": bound '" + pb.name +
                                  "' depends on n; provide grid.n or a [model] section");

    for (const auto& n : ns)
        for (double x : xs) {
            BoundResult b = pb.eval(x, n.value_or(1));
            ReportCell cell = base_cell(rep, run);
            cell.model = model ? model_label(*model) : "";
            cell.n = n;
            cell.alpha = pb.alpha;
            cell.p = pb.p;
            cell.delta = pb.delta;
            cell.x = x;
            cell.bound_name = pb.name;
            cell.bound_value = b.value;
            cell.bound_branch = branch_name(b.branch);
            rep.cells.push_back(std::move(cell));
        }
}

void run_domination(const Config& cfg, const RunParams& run, Report& rep) {
    const MartingaleModel model = read_model(cfg);
    const Statistic stat = parse_statistic(cfg, cfg.get_string("grid.statistic", "max_partial"));
    const std::vector<double> xs = cfg.get_grid("grid.x");
    std::vector<long> ns =
        cfg.has("grid.n") ? long_grid(cfg, "grid.n") : std::vector<long>{model.n};

    const bool have_bound = cfg.has("bound.name");
    PathBound pb;
    if (have_bound) pb = resolve_path_bound(cfg, &model);

    for (long n : ns) {
        MartingaleModel m = model;
        m.n = static_cast<int>(n);
        validate(m);
        const auto ests =
            tail_grid(m, xs, run.reps, stat, run.seed, run.ci_level, run.threads);

        if (!have_bound) {
            for (const auto& est : ests) {
                ReportCell cell = base_cell(rep, run);
                cell.model = model_label(m);
                cell.n = n;
                cell.alpha = m.alpha;
                cell.x = est.x;
                cell.statistic = statistic_name(stat);
                cell.p_hat = est.p_hat;
                cell.ci_low = est.ci_low;
                cell.ci_high = est.ci_high;
                rep.cells.push_back(std::move(cell));
            }
            continue;
        }

        std::vector<double> bvals;
        std::vector<std::string> branches;
        for (double x : xs) {
            BoundResult b = pb.eval(x, n);
            bvals.push_back(b.value);
            branches.emplace_back(branch_name(b.branch));
        }
        const DominationReport dom = domination_check(bvals, ests);
        for (std::size_t i = 0; i < ests.size(); ++i) {
            ReportCell cell = base_cell(rep, run);
            cell.model = model_label(m);
            cell.n = n;
            cell.alpha = pb.alpha;
            cell.p = pb.p;
            cell.delta = pb.delta;
            cell.x = ests[i].x;
            cell.statistic = statistic_name(stat);
            cell.bound_name = pb.name;
            cell.bound_value = bvals[i];
            cell.bound_branch = branches[i];
            cell.p_hat = ests[i].p_hat;
            cell.ci_low = ests[i].ci_low;
            cell.ci_high = ests[i].ci_high;
            cell.verdict = verdict_name(dom.rows[i].verdict);
            rep.cells.push_back(std::move(cell));
        }
    }
}

void run_ldp_rate(const Config& cfg, const RunParams& run, Report& rep) {
    const MartingaleModel model = read_model(cfg);
    if (model.kind != ModelKind::iid_subexp && model.kind != ModelKind::iid_moment)
        throw ConfigError(cfg.origin() + ": ldp_rate needs an i.i.d. model");
    const PathBound pb = resolve_path_bound(cfg, &model);
    const std::vector<double> eps_grid = cfg.get_grid("grid.epsilon");
    const std::vector<long> ns = long_grid(cfg, "grid.n");

    for (double eps : eps_grid) {
        ReportCell target = base_cell(rep, run);
        target.model = model_label(model);
        target.alpha = model.alpha;
        target.x = eps;
        target.bound_name = "analytic_target";
        target.bound_value = -std::pow(eps, model.alpha);
        rep.cells.push_back(std::move(target));

        for (long n : ns) {
            BoundResult b = pb.eval(eps * static_cast<double>(n), n);
            ReportCell cell = base_cell(rep, run);
            cell.model = model_label(model);
            cell.n = n;
            cell.alpha = model.alpha;
            cell.p = pb.p;
            cell.x = eps;
            cell.bound_name = "rate(" + pb.name + ")";
            cell.bound_value = ldp_rate(model.alpha, static_cast<double>(n), b.log_value());
            cell.bound_branch = branch_name(b.branch);
            rep.cells.push_back(std::move(cell));
        }
    }
}

void run_fuk_comparison(const Config& cfg, const RunParams& run, Report& rep) {
    const MartingaleModel model = read_model(cfg);
    const double p = cfg.has("bound.p") ? cfg.get_double("bound.p") : model.p;
    std::optional<ModelConstants> mc = model_constants(model);
    bool needs_n = false;
    auto q_fn = const_or_auto(cfg, "bound.quad_sup", &model, mc, auto_quad_sup, needs_n);
    auto w_fn = const_or_auto(cfg, "bound.pmom_sup", &model, mc, auto_pmom_sup, needs_n);
    auto qs_fn = const_or_auto(cfg, "bound.quad_sup_per_step", &model, mc, auto_quad_per_step,
                               needs_n);
    auto ws_fn = const_or_auto(cfg, "bound.pmom_sup_per_step", &model, mc, auto_pmom_per_step,
                               needs_n);

    const std::vector<double> xs = cfg.get_grid("grid.x");
    const std::vector<long> ns =
        cfg.has("grid.n") ? long_grid(cfg, "grid.n") : std::vector<long>{model.n};

    for (long n : ns)
        for (double x : xs) {
            const MomentParams agg{p, q_fn(n), w_fn(n)};
            const MomentParams per{p, qs_fn(n), ws_fn(n)};
            const std::pair<const char*, BoundResult> rows[] = {
                {"fuk_nagaev", fuk_nagaev_bound(x, agg)},
                {"fuk_nagaev_per_step", fuk_nagaev_per_step_bound(x, per)}};
            for (const auto& [name, b] : rows) {
                ReportCell cell = base_cell(rep, run);
                cell.model = model_label(model);
                cell.n = n;
                cell.p = p;
                cell.x = x;
                cell.bound_name = name;
                cell.bound_value = b.value;
                cell.bound_branch = branch_name(b.branch);
                rep.cells.push_back(std::move(cell));
            }
        }
}

void run_regression(const Config& cfg, const RunParams& run, Report& rep) {
    const RegressionConfig reg = read_regression(cfg);
    const Statistic stat = parse_statistic(cfg, cfg.get_string("grid.statistic", "abs_final"));
    const std::vector<double> xs = cfg.get_grid("grid.x");
    const RegBound rb = resolve_reg_bound(cfg, reg);

    const auto ests = tail_grid(reg, xs, run.reps, stat, run.seed, run.ci_level, run.threads);
    std::vector<double> bvals;
    std::vector<std::string> branches;
    for (double x : xs) {
        BoundResult b = rb.eval(x);
        bvals.push_back(b.value);
        branches.emplace_back(branch_name(b.branch));
    }
    const DominationReport dom = domination_check(bvals, ests);
    for (std::size_t i = 0; i < ests.size(); ++i) {
        ReportCell cell = base_cell(rep, run);
        cell.model = regression_label(reg);
        cell.n = reg.n;
        cell.alpha = rb.alpha;
        cell.p = rb.p;
        cell.delta = rb.delta;
        cell.x = ests[i].x;
        cell.statistic = statistic_name(stat);
        cell.bound_name = rb.name;
        cell.bound_value = bvals[i];
        cell.bound_branch = branches[i];
        cell.p_hat = ests[i].p_hat;
        cell.ci_low = ests[i].ci_low;
        cell.ci_high = ests[i].ci_high;
        cell.verdict = verdict_name(dom.rows[i].verdict);
        rep.cells.push_back(std::move(cell));
    }
}

void run_berry_esseen(const Config& cfg, const RunParams& run, Report& rep) {
    const RegressionConfig reg = read_regression(cfg);
    const double p = cfg.get_double("bound.p", 3.0);
    if (!(p > 2.0)) throw ConfigError(cfg.origin() + ": bound.p must exceed 2");
    const double c_const = cfg.get_double("bound.c_const");

    double weight_moment = 0.0;
    if (!cfg.has("bound.weight_moment") || cfg.get_string("bound.weight_moment") == "auto") {
        // exact for sign regressors: all n weights equal n^{-1/2}
        if (!std::holds_alternative<Rademacher>(reg.phi_law))
            throw ConfigError(cfg.origin() +
                              ": bound.weight_moment is auto only for rademacher regressors");
        weight_moment = std::pow(static_cast<double>(reg.n), 1.0 - p / 2.0);
    } else {
        weight_moment = cfg.get_double("bound.weight_moment");
    }

    const std::vector<double> xs = cfg.get_grid("grid.x");
    const double sigma = std::sqrt(moment_oracle(reg.noise_law, Quad{}));
    auto draw = statistic_sampler(reg, Statistic::final_sum, run.seed);
    std::vector<double> sample(static_cast<std::size_t>(run.reps));
    parallel_for(
        run.reps,
        [&](long r) { sample[static_cast<std::size_t>(r)] = draw(r) / sigma; },
        run.threads);

    const std::vector<double> gaps = nonuniform_cdf_gap(sample, p, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double envelope = berry_esseen_envelope(xs[i], p, weight_moment, c_const);
        ReportCell cell = base_cell(rep, run);
        cell.model = regression_label(reg);
        cell.n = reg.n;
        cell.p = p;
        cell.x = xs[i];
        cell.statistic = "cdf_gap";
        cell.bound_name = "be_envelope";
        cell.bound_value = envelope;
        cell.p_hat = gaps[i];
        cell.verdict = gaps[i] <= envelope ? "PASS" : "FAIL";
        rep.cells.push_back(std::move(cell));
    }
}

void run_invariance(const Config& cfg, const RunParams& run, Report& rep) {
    const MartingaleModel model = read_model(cfg);
    const std::vector<double> levels = cfg.get_grid("grid.n_levels");
    const double rate_const = cfg.get_double("check.rate_const", 1.0);
    const bool explicit_ks = cfg.has("check.ks_threshold");
    const double ks_explicit = cfg.get_double("check.ks_threshold", 0.0);
    const double corr_threshold = 4.0 / std::sqrt(static_cast<double>(run.reps));

    for (double level : levels) {
        const auto paths =
            invariance_paths(model, level, 5, run.reps, run.seed, 10000000, run.threads);

        std::vector<double> endpoint;
        std::vector<double> d1, d2;
        endpoint.reserve(paths.size());
        for (const auto& path : paths) {
            endpoint.push_back(path.h[4]);
            d1.push_back(path.h[2] - path.h[1]);
            d2.push_back(path.h[4] - path.h[3]);
        }
        const double ks = ks_statistic(endpoint, [](double x) { return normal_cdf(x); });
        const double ks_threshold =
            explicit_ks ? ks_explicit
                        : rate_const * std::pow(level, -0.25) +
                              1.63 / std::sqrt(static_cast<double>(run.reps));

        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < d1.size(); ++i) {
            m1 += d1[i];
            m2 += d2[i];
        }
        m1 /= static_cast<double>(d1.size());
        m2 /= static_cast<double>(d2.size());
        double c11 = 0.0, c22 = 0.0, c12 = 0.0;
        for (std::size_t i = 0; i < d1.size(); ++i) {
            c11 += (d1[i] - m1) * (d1[i] - m1);
            c22 += (d2[i] - m2) * (d2[i] - m2);
            c12 += (d1[i] - m1) * (d2[i] - m2);
        }
        const double corr = c12 / std::sqrt(c11 * c22);

        ReportCell ks_cell = base_cell(rep, run);
        ks_cell.model = model_label(model);
        ks_cell.n = std::llround(level);
        ks_cell.statistic = "h_endpoint_ks";
        ks_cell.bound_name = "ks_threshold";
        ks_cell.bound_value = ks_threshold;
        ks_cell.p_hat = ks;
        ks_cell.verdict = ks <= ks_threshold ? "PASS" : "FAIL";
        rep.cells.push_back(std::move(ks_cell));

        ReportCell corr_cell = base_cell(rep, run);
        corr_cell.model = model_label(model);
        corr_cell.n = std::llround(level);
        corr_cell.statistic = "increment_corr";
        corr_cell.bound_name = "corr_threshold";
        corr_cell.bound_value = corr_threshold;
        corr_cell.p_hat = std::abs(corr);
        corr_cell.verdict = std::abs(corr) <= corr_threshold ? "PASS" : "FAIL";
        rep.cells.push_back(std::move(corr_cell));
    }
}

} // namespace

Report run_experiment(const Config& cfg, const RunOverrides& overrides) {
    const auto t0 = std::chrono::steady_clock::now();

    Report rep;
    rep.experiment = normalize_kind(cfg.get_string("experiment"));
    rep.config_echo = cfg.items();

    const RunParams run = read_run(cfg, overrides);
    rep.seed = run.seed;

    if (rep.experiment == "bound_table")
        run_bound_table(cfg, run, rep);
    else if (rep.experiment == "domination")
        run_domination(cfg, run, rep);
    else if (rep.experiment == "ldp_rate")
        run_ldp_rate(cfg, run, rep);
    else if (rep.experiment == "fuk_comparison")
        run_fuk_comparison(cfg, run, rep);
    else if (rep.experiment == "regression")
        run_regression(cfg, run, rep);
    else if (rep.experiment == "berry_esseen")
        run_berry_esseen(cfg, run, rep);
    else if (rep.experiment == "invariance")
        run_invariance(cfg, run, rep);
    else
        throw ConfigError(cfg.origin() + ": unknown experiment '" + rep.experiment + "'");

    cfg.reject_unknown_keys();
    rep.overall = overall_verdict(rep.cells);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace mtb
