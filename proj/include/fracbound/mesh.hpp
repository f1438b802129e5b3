#ifndef FRACBOUND_MESH_HPP
#define FRACBOUND_MESH_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "fracbound/error.hpp"

namespace fracbound {

/// Graded mesh on [0, T]: nodes t_i = T (i/N)^r, clustered at 0 for r > 1.
class GradedMesh {
public:
    GradedMesh(double T, std::size_t n, double r) : T_(T), n_(n), r_(r) {
        if (!(T > 0.0)) throw DomainError("GradedMesh: T must be positive");
        if (n < 2) throw DomainError("GradedMesh: need at least 2 cells");
        if (!(r >= 1.0)) throw DomainError("GradedMesh: grading exponent must be >= 1");
        nodes_.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            nodes_[i] = T * std::pow(static_cast<double>(i) / static_cast<double>(n), r);
        nodes_[n] = T;
        if (nodes_[1] <= 0.0)
            throw DomainError("GradedMesh: grading too strong, first node underflows");
    }

    static double default_grading(double beta) { return 2.0 / beta; }

    double T() const { return T_; }
    std::size_t cells() const { return n_; }
    std::size_t size() const { return n_ + 1; }
    double grading() const { return r_; }
    double node(std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Index of the node nearest to t.
    std::size_t nearest_node(double t) const {
        std::size_t lo = 0, hi = n_;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (nodes_[mid] <= t ? lo : hi) = mid;
        }
        return (t - nodes_[lo] <= nodes_[hi] - t) ? lo : hi;
    }

private:
    double T_;
    std::size_t n_;
    double r_;
    std::vector<double> nodes_;
};

/// Samples of t^w u(t) on a graded mesh. values[0] holds the limit of
/// t^w u(t) at 0+ (the function itself may blow up there).
struct WeightedSample {
    GradedMesh mesh;
    double weight_exponent = 0.0;
    std::vector<double> values; // size mesh.size()

    WeightedSample(GradedMesh m, double w)
        : mesh(std::move(m)), weight_exponent(w), values(mesh.size(), 0.0) {}
    WeightedSample(GradedMesh m, double w, std::vector<double> v)
        : mesh(std::move(m)), weight_exponent(w), values(std::move(v)) {
        if (values.size() != mesh.size())
            throw DomainError("WeightedSample: value count does not match mesh");
    }

    /// Raw function value t_i^{-w} v_i at node i >= 1.
    double raw(std::size_t i) const {
        return values[i] * std::pow(mesh.node(i), -weight_exponent);
    }

    /// Weighted value at arbitrary t in [0, T], linear between nodes.
    double interpolate_weighted(double t) const {
        if (t <= 0.0) return values[0];
        if (t >= mesh.T()) return values.back();
        std::size_t lo = 0, hi = mesh.cells();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (mesh.node(mid) <= t ? lo : hi) = mid;
        }
        const double t0 = mesh.node(lo), t1 = mesh.node(hi);
        const double w = (t - t0) / (t1 - t0);
        return values[lo] + w * (values[hi] - values[lo]);
    }
};

} // namespace fracbound

#endif
