#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newtonflow/errors.hpp"
#include "newtonflow/linalg.hpp"

namespace newtonflow {

/// Relative central-difference step, cbrt(machine epsilon).
inline const double kFdStepRel = std::cbrt(std::numeric_limits<double>::epsilon());

/// Closed-form quantities known for oracle maps. The field companions refer
/// to the flow toward f(0).
struct MapCompanions {
    std::function<Matrix(const Vector&)> inverse_jacobian;
    std::function<Vector(const Vector&)> field_to_origin_image;
    std::function<double(const Vector&)> x_dot_field;
};

/// A C¹ map f: ℝⁿ → ℝⁿ together with its Jacobian source.
///
/// Evaluators must be pure so that a map can be shared by concurrent workers.
class C1Map {
public:
    using Evaluator = std::function<Vector(const Vector&)>;
    using JacobianFn = std::function<Matrix(const Vector&)>;

    C1Map(std::string name, std::size_t dim, Evaluator f, std::optional<JacobianFn> jac = std::nullopt,
          double fd_step_rel = kFdStepRel)
        : name_(std::move(name)), dim_(dim), f_(std::move(f)), jac_(std::move(jac)), h_rel_(fd_step_rel) {
        if (dim_ == 0) throw DimensionError("map dimension must be positive");
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return dim_; }
    bool has_analytic_jacobian() const noexcept { return jac_.has_value(); }
    double fd_step_rel() const noexcept { return h_rel_; }

    const std::optional<MapCompanions>& companions() const noexcept { return companions_; }
    C1Map& with_companions(MapCompanions c) {
        companions_ = std::move(c);
        return *this;
    }

    Vector eval(const Vector& x) const {
        check_input(x);
        Vector y = f_(x);
        if (y.size() != dim_) throw DimensionError(name_ + ": evaluator returned wrong size");
        if (!all_finite(y)) throw NonFiniteError(name_ + ": non-finite value");
        return y;
    }

    Vector operator()(const Vector& x) const { return eval(x); }

    Matrix jacobian(const Vector& x) const {
        check_input(x);
        if (jac_) {
            Matrix j = (*jac_)(x);
            if (j.dim() != dim_) throw DimensionError(name_ + ": jacobian has wrong size");
            return j;
        }
        return fd_jacobian(x);
    }

    /// Central differences with step h_i = h_rel·max(1, |x_i|).
    Matrix fd_jacobian(const Vector& x) const {
        check_input(x);
        std::vector<double> entries(dim_ * dim_);
        Vector xp = x;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double h = h_rel_ * std::max(1.0, std::abs(x[j]));
            xp[j] = x[j] + h;
            const Vector fp = eval(xp);
            xp[j] = x[j] - h;
            const Vector fm = eval(xp);
            xp[j] = x[j];
            // divide by the representable step actually taken
            const double step = (x[j] + h) - (x[j] - h);
            for (std::size_t i = 0; i < dim_; ++i) entries[i * dim_ + j] = (fp[i] - fm[i]) / step;
        }
        if (!all_finite(entries)) throw NonFiniteError(name_ + ": non-finite finite-difference jacobian");
        return Matrix(dim_, std::move(entries));
    }

private:
    void check_input(const Vector& x) const {
        if (x.size() != dim_) {
            throw DimensionError(name_ + ": expected dimension " + std::to_string(dim_) + ", got " +
                                 std::to_string(x.size()));
        }
        if (!all_finite(x)) throw NonFiniteError(name_ + ": non-finite input");
    }

    std::string name_;
    std::size_t dim_;
    Evaluator f_;
    std::optional<JacobianFn> jac_;
    double h_rel_;
    std::optional<MapCompanions> companions_;
};

/// max over probes of ‖J_analytic − J_fd‖∞ / (1 + ‖J_analytic‖∞).
inline double fd_jacobian_check(const C1Map& map, std::span<const Vector> probes) {
    if (!map.has_analytic_jacobian()) throw ParameterError(map.name() + " has no analytic jacobian");
    double worst = 0.0;
    for (const Vector& x : probes) {
        const Matrix ja = map.jacobian(x);
        const Matrix jf = map.fd_jacobian(x);
        Matrix diff(map.dim());
        for (std::size_t k = 0; k < ja.data().size(); ++k) diff.data()[k] = ja.data()[k] - jf.data()[k];
        worst = std::max(worst, diff.norm_inf() / (1.0 + ja.norm_inf()));
    }
    return worst;
}

}  // namespace newtonflow
