#include "speckle/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace speckle {

namespace {

double simplex_diameter(const std::vector<std::vector<double>>& verts) {
    double d = 0.0;
    for (std::size_t i = 1; i < verts.size(); ++i)
        for (std::size_t j = 0; j < verts[0].size(); ++j)
            d = std::max(d, std::abs(verts[i][j] - verts[0][j]));
    return d;
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, double initial_step, double diameter_tol,
                          int max_iterations) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> verts(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) verts[i + 1][i] += initial_step;

    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(verts[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> nv(dim + 1);
        std::vector<double> nf(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) {
            nv[i] = verts[idx[i]];
            nf[i] = fv[idx[i]];
        }
        verts = std::move(nv);
        fv = std::move(nf);
    };
    order();

    SimplexResult res;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        if (simplex_diameter(verts) < diameter_tol) {
            res.converged = true;
            break;
        }
        // centroid of all but the worst vertex
        std::vector<double> cen(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t v = 0; v < dim; ++v) cen[i] += verts[v][i];
            cen[i] /= static_cast<double>(dim);
        }
        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t i = 0; i < dim; ++i) x[i] = cen[i] + t * (verts[dim][i] - cen[i]);
            return x;
        };

        const auto xr = blend(-1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            const auto xe = blend(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                verts[dim] = xe;
                fv[dim] = fe;
            } else {
                verts[dim] = xr;
                fv[dim] = fr;
            }
        } else if (fr < fv[dim - 1]) {
            verts[dim] = xr;
            fv[dim] = fr;
        } else {
            const bool outside = fr < fv[dim];
            const auto xc = blend(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : fv[dim])) {
                verts[dim] = xc;
                fv[dim] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t v = 1; v <= dim; ++v) {
                    for (std::size_t i = 0; i < dim; ++i)
                        verts[v][i] = verts[0][i] + 0.5 * (verts[v][i] - verts[0][i]);
                    fv[v] = f(verts[v]);
                }
            }
        }
        order();
    }
    res.x = verts[0];
    res.value = fv[0];
    res.iterations = iter;
    return res;
}

}
