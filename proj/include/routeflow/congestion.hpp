#pragma once

#include <memory>
#include <span>
#include <vector>

#include "routeflow/errors.hpp"

namespace routeflow {

/// Flow-density law of a single link: a strictly increasing, strictly
/// concave map rho -> flow with mu(0) = 0 and a finite derivative at 0.
/// Implementations must supply the inverse and the derivative in closed
/// form so no numeric inversion is needed.
class LinkLaw {
public:
    virtual ~LinkLaw() = default;
    virtual double flow_of_density(double rho) const = 0;
    virtual double density_of_flow(double flow) const = 0;
    virtual double flow_derivative(double rho) const = 0;
    /// Supremum of attainable flow (may be +inf for future families).
    virtual double capacity() const = 0;
};

/// mu(rho) = C * (1 - exp(-theta * rho)).
class ExponentialLaw final : public LinkLaw {
public:
    ExponentialLaw(double capacity, double theta);
    double flow_of_density(double rho) const override;
    double density_of_flow(double flow) const override;
    double flow_derivative(double rho) const override;
    double capacity() const override { return capacity_; }
    double theta() const { return theta_; }

private:
    double capacity_;
    double theta_;
};

/// Per-link congestion physics for a whole network.
class CongestionModel {
public:
    static CongestionModel exponential(std::span<const double> capacities,
                                       std::span<const double> thetas);

    int link_count() const { return static_cast<int>(laws_.size()); }
    const LinkLaw& law(int e) const { return *laws_[static_cast<std::size_t>(e)]; }

    double flow_of_density(int e, double rho) const;   // throws NegativeDensity
    double density_of_flow(int e, double flow) const;  // throws FlowAtOrAboveCapacity
    double flow_derivative(int e, double rho) const;   // throws NegativeDensity
    double capacity(int e) const { return law(e).capacity(); }

    /// Traversal time at flow f: 1/mu'(0) at f = 0, mu^{-1}(f)/f on (0, C),
    /// +inf at or above capacity. Flows below 1e-12 take the f = 0 branch.
    double delay(int e, double flow) const;

    std::vector<double> flows_of_densities(std::span<const double> rho) const;
    std::vector<double> densities_of_flows(std::span<const double> flow) const;
    std::vector<double> delays(std::span<const double> flow) const;
    std::vector<double> capacities() const;

private:
    std::vector<std::shared_ptr<const LinkLaw>> laws_;
};

}  // namespace routeflow
