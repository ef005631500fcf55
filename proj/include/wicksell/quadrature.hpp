#ifndef WICKSELL_QUADRATURE_HPP_
#define WICKSELL_QUADRATURE_HPP_

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wicksell {

struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Globally adaptive Gauss-Kronrod (G7,K15) integration over [a,b].
/// Panels are bisected worst-first until the summed error estimate meets
/// rel_tol * |integral| + abs_tol. Throws QuadratureError if the budget of
/// panel refinements is exhausted before converging.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double abs_tol = 0.0,
                 int max_panels = 20000);

/// Same, with forced subdivision at interior breakpoints (kinks,
/// integrable singularities, support edges). Breakpoints outside (a,b)
/// are ignored.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& breakpoints,
                       double rel_tol = 1e-10, double abs_tol = 0.0,
                       int max_panels = 20000);

}  // namespace wicksell

#endif  // WICKSELL_QUADRATURE_HPP_
