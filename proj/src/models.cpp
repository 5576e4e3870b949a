#include "mtb/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mtb/rng.hpp"

namespace mtb {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("martingale model: ") + what);
}

bool is_weighted(ModelKind kind) {
    return kind == ModelKind::self_normalized || kind == ModelKind::random_weighted ||
           kind == ModelKind::pnorm_weighted;
}

bool is_bounded_law(const Distribution& dist) {
    return std::holds_alternative<Rademacher>(dist) || std::holds_alternative<ThreePoint>(dist);
}

} // namespace

const char* kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::iid_subexp: return "iid_subexp";
    case ModelKind::iid_moment: return "iid_moment";
    case ModelKind::self_normalized: return "self_normalized";
    case ModelKind::random_weighted: return "random_weighted";
    case ModelKind::pnorm_weighted: return "pnorm_weighted";
    case ModelKind::regression_driven: return "regression_driven";
    }
    return "unknown";
}

void validate(const MartingaleModel& model) {
    require(model.n >= 1, "path length must be at least 1");
    require(model.alpha > 0.0 && model.alpha < 1.0, "alpha must lie in (0,1)");
    require(model.p >= 1.0, "moment order must be at least 1");
    require(model.delta > 0.0, "delta must be positive");

    if (model.kind != ModelKind::self_normalized) {
        validate(model.base);
        require(is_symmetric(model.base), "increment law must be symmetric around 0");
    }
    if (is_weighted(model.kind)) {
        validate(model.weight_law);
        // the norm-comparison arguments need unbounded weight magnitudes
        require(!is_bounded_law(model.weight_law), "weight magnitudes must be unbounded");
    }
    if (model.kind == ModelKind::regression_driven) {
        require(static_cast<int>(model.design.size()) == model.n,
                "design length must match the path length");
        double norm2 = 0.0;
        for (double phi : model.design) {
            require(std::isfinite(phi), "design entries must be finite");
            norm2 += phi * phi;
        }
        require(norm2 > 0.0, "design must not be identically zero");
    } else {
        require(model.design.empty(), "only regression_driven models take a design");
    }
}

MartingalePath sample_path(const MartingaleModel& model, std::uint64_t seed,
                           std::uint64_t stream) {
    validate(model);
    const int n = model.n;
    StepRng rng(seed, stream);

    MartingalePath path;
    path.seed = seed;
    path.stream = stream;
    path.increments.resize(n);

    switch (model.kind) {
    case ModelKind::iid_subexp:
    case ModelKind::iid_moment: {
        for (int i = 0; i < n; ++i)
            path.increments[i] = sample(model.base, rng.block(i));
        break;
    }
    case ModelKind::self_normalized:
    case ModelKind::random_weighted:
    case ModelKind::pnorm_weighted: {
        std::vector<double> mags(n);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            mags[i] = std::abs(sample(model.weight_law, rng.block(i, 0)));
            norm += model.kind == ModelKind::pnorm_weighted ? std::pow(mags[i], model.p)
                                                            : mags[i] * mags[i];
        }
        if (!(norm > 0.0))
            throw std::runtime_error("sample_path: degenerate weight draw, all magnitudes zero");
        norm = model.kind == ModelKind::pnorm_weighted ? std::pow(norm, 1.0 / model.p)
                                                       : std::sqrt(norm);
        path.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double w = mags[i] / norm;
            path.weights[i] = w;
            if (model.kind == ModelKind::self_normalized) {
                path.increments[i] = rng.block(i, 1).bit(0) ? w : -w;
            } else {
                path.increments[i] = w * sample(model.base, rng.block(i, 2));
            }
        }
        break;
    }
    case ModelKind::regression_driven: {
        double norm2 = 0.0;
        for (double phi : model.design) norm2 += phi * phi;
        double norm = std::sqrt(norm2);
        path.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            path.weights[i] = model.design[i] / norm;
            path.increments[i] = path.weights[i] * sample(model.base, rng.block(i, 2));
        }
        break;
    }
    }

    path.partials.resize(n + 1);
    path.partials[0] = 0.0;
    for (int i = 0; i < n; ++i) path.partials[i + 1] = path.partials[i] + path.increments[i];
    return path;
}

double pos_pow_moment(const Distribution& dist, double p) {
    if (std::holds_alternative<Rademacher>(dist)) return 0.5;
    if (const auto* tp = std::get_if<ThreePoint>(&dist)) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            if (tp->value[i] > 0.0) s += tp->prob[i] * std::pow(tp->value[i], p);
        return s;
    }
    if (std::holds_alternative<Exponential>(dist)) return moment_oracle(dist, AbsPow{p});
    return 0.5 * moment_oracle(dist, AbsPow{p});
}

ModelConstants model_constants(const MartingaleModel& model) {
    validate(model);
    ModelConstants mc;
    if (model.kind == ModelKind::self_normalized) return mc; // base factor is the sign itself
    mc.quad = moment_oracle(model.base, Quad{});
    mc.pos_pow = pos_pow_moment(model.base, model.p);
    // i.i.d. kinds enter the exp-weighted sum directly, so the one-sided
    // exponent applies; the weighted kinds go through the two-sided variant
    bool one_sided =
        model.kind == ModelKind::iid_subexp || model.kind == ModelKind::iid_moment;
    try {
        mc.subexp = moment_oracle(model.base, SubexpWeighted{model.alpha, !one_sided});
        mc.has_subexp = true;
    } catch (const std::domain_error&) {
        mc.has_subexp = false; // heavy-tailed increments: only power moments exist
    }
    return mc;
}

PathMoments path_moments(const MartingaleModel& model, const MartingalePath& path,
                         const ModelConstants& mc) {
    const int n = model.n;
    if (static_cast<int>(path.increments.size()) != n ||
        (model.kind != ModelKind::iid_subexp && model.kind != ModelKind::iid_moment &&
         static_cast<int>(path.weights.size()) != n))
        throw std::invalid_argument("path_moments: path does not match the model");

    PathMoments pm;
    pm.quad_char.resize(n);
    pm.xi_mom.resize(n);

    if (model.kind == ModelKind::iid_subexp || model.kind == ModelKind::iid_moment) {
        if (mc.has_subexp) pm.upsilon.resize(n);
        for (int i = 0; i < n; ++i) {
            pm.quad_char[i] = (i ? pm.quad_char[i - 1] : 0.0) + mc.quad;
            pm.xi_mom[i] = (i ? pm.xi_mom[i - 1] : 0.0) + mc.pos_pow;
            if (mc.has_subexp) pm.upsilon[i] = (i ? pm.upsilon[i - 1] : 0.0) + mc.subexp;
        }
        return pm;
    }

    if (model.kind == ModelKind::self_normalized) {
        pm.upsilon.resize(n);
        for (int i = 0; i < n; ++i) {
            double w = path.weights[i];
            // conditioning on the magnitudes leaves only the sign average
            pm.quad_char[i] = (i ? pm.quad_char[i - 1] : 0.0) + w * w;
            pm.upsilon[i] = (i ? pm.upsilon[i - 1] : 0.0) +
                            0.5 * w * w * (std::exp(std::pow(w, model.alpha)) + 1.0);
            pm.xi_mom[i] = (i ? pm.xi_mom[i - 1] : 0.0) + 0.5 * std::pow(w, model.p);
        }
        return pm;
    }

    // random_weighted, pnorm_weighted, regression_driven: weights are known
    // given the past, the base factor is averaged analytically.  The upsilon
    // entries use the unscaled base moment, which dominates the exact scaled
    // one because every weight has magnitude at most 1.
    if (mc.has_subexp) pm.upsilon.resize(n);
    for (int i = 0; i < n; ++i) {
        double w = std::abs(path.weights[i]);
        pm.quad_char[i] = (i ? pm.quad_char[i - 1] : 0.0) + w * w * mc.quad;
        pm.xi_mom[i] = (i ? pm.xi_mom[i - 1] : 0.0) + std::pow(w, model.p) * mc.pos_pow;
        if (mc.has_subexp) pm.upsilon[i] = (i ? pm.upsilon[i - 1] : 0.0) + w * w * mc.subexp;
    }
    return pm;
}

PathMoments path_moments(const MartingaleModel& model, const MartingalePath& path) {
    return path_moments(model, path, model_constants(model));
}

} // namespace mtb
