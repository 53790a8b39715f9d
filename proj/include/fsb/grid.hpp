#pragma once

// Regular-grid field representation: a function as evaluations at the cell
// centers of a rectangular grid. Cell-center points make the discrete cosine
// modes exactly orthonormal under the rectangle-rule quadrature.

#include <Eigen/Core>
#include <array>
#include <stdexcept>

namespace fsb {

struct GridSpec {
    int dims = 1;                                   // 1 or 2
    std::array<int, 2> res = {0, 1};                // res[1] == 1 in 1D
    std::array<std::array<double, 2>, 2> bounds = {{{0.0, 1.0}, {0.0, 1.0}}};

    static GridSpec make_1d(int n, double lo, double hi) {
        GridSpec g;
        g.dims = 1;
        g.res = {n, 1};
        g.bounds = {{{lo, hi}, {0.0, 1.0}}};
        g.validate();
        return g;
    }
    static GridSpec make_2d(int nx, int ny, double lo, double hi) {
        GridSpec g;
        g.dims = 2;
        g.res = {nx, ny};
        g.bounds = {{{lo, hi}, {lo, hi}}};
        g.validate();
        return g;
    }

    void validate() const {
        if (dims != 1 && dims != 2) throw std::invalid_argument("GridSpec: dims must be 1 or 2");
        for (int d = 0; d < dims; ++d) {
            if (res[d] < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2");
            if (!(bounds[d][0] < bounds[d][1]) || !std::isfinite(bounds[d][0]) ||
                !std::isfinite(bounds[d][1]))
                throw std::invalid_argument("GridSpec: bounds must be finite with lower < upper");
        }
        if (dims == 1 && res[1] != 1) throw std::invalid_argument("GridSpec: 1d grid with res[1] != 1");
    }

    int num_points() const { return res[0] * res[1]; }
    double extent(int d) const { return bounds[d][1] - bounds[d][0]; }
    double spacing(int d) const { return extent(d) / res[d]; }
    double cell_volume() const {
        double v = spacing(0);
        if (dims == 2) v *= spacing(1);
        return v;
    }
    // linear index i = ix * res[1] + iy; 1d reduces to i = ix
    std::array<double, 2> point(int i) const {
        const int ix = i / res[1], iy = i % res[1];
        std::array<double, 2> p = {bounds[0][0] + (ix + 0.5) * spacing(0), 0.0};
        if (dims == 2) p[1] = bounds[1][0] + (iy + 0.5) * spacing(1);
        return p;
    }

    bool operator==(const GridSpec& o) const {
        if (dims != o.dims) return false;
        for (int d = 0; d < dims; ++d)
            if (res[d] != o.res[d] || bounds[d] != o.bounds[d]) return false;
        return true;
    }
};

struct GridField {
    GridSpec grid;
    Eigen::VectorXd values;  // length num_points * channels
    int channels = 1;

    GridField() = default;
    GridField(GridSpec g, Eigen::VectorXd v, int ch = 1)
        : grid(std::move(g)), values(std::move(v)), channels(ch) {
        check();
    }
    static GridField zero(const GridSpec& g) {
        return GridField(g, Eigen::VectorXd::Zero(g.num_points()));
    }

    void check() const {
        if (channels != 1) throw std::invalid_argument("GridField: only single-channel fields supported");
        if (values.size() != static_cast<long>(grid.num_points()) * channels)
            throw std::invalid_argument("GridField: value count does not match grid");
        if (!values.allFinite()) throw std::invalid_argument("GridField: non-finite values");
    }

    // quadrature inner product <f, g>_H (rectangle rule)
    double inner(const GridField& other) const {
        return grid.cell_volume() * values.dot(other.values);
    }
    double norm2() const { return grid.cell_volume() * values.squaredNorm(); }
};

}  // namespace fsb
