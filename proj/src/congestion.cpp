#include "routeflow/congestion.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace routeflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroFlowBranch = 1e-12;
}  // namespace

ExponentialLaw::ExponentialLaw(double capacity, double theta)
    : capacity_(capacity), theta_(theta) {
    if (!(capacity > 0.0)) throw ValidationError("link capacity must be positive");
    if (!(theta > 0.0)) throw ValidationError("link theta must be positive");
    if (capacity == kInf)
        throw ValidationError("the exponential flow-density family has finite capacity");
}

double ExponentialLaw::flow_of_density(double rho) const {
    return -capacity_ * std::expm1(-theta_ * rho);
}

double ExponentialLaw::density_of_flow(double flow) const {
    // -(1/theta) * log(1 - f/C), in log space for accuracy near capacity.
    return -std::log1p(-flow / capacity_) / theta_;
}

double ExponentialLaw::flow_derivative(double rho) const {
    return capacity_ * theta_ * std::exp(-theta_ * rho);
}

CongestionModel CongestionModel::exponential(std::span<const double> capacities,
                                             std::span<const double> thetas) {
    if (capacities.size() != thetas.size())
        throw LengthMismatch("capacity and theta vectors differ in length");
    CongestionModel model;
    model.laws_.reserve(capacities.size());
    for (std::size_t e = 0; e < capacities.size(); ++e)
        model.laws_.push_back(std::make_shared<ExponentialLaw>(capacities[e], thetas[e]));
    return model;
}

double CongestionModel::flow_of_density(int e, double rho) const {
    if (!(rho >= 0.0))
        throw NegativeDensity("density " + std::to_string(rho) + " on link " + std::to_string(e));
    return law(e).flow_of_density(rho);
}

double CongestionModel::density_of_flow(int e, double flow) const {
    if (!(flow >= 0.0))
        throw NegativeFlow("flow " + std::to_string(flow) + " on link " + std::to_string(e));
    if (flow >= law(e).capacity())
        throw FlowAtOrAboveCapacity("flow " + std::to_string(flow) + " on link " +
                                    std::to_string(e) + " reaches capacity " +
                                    std::to_string(law(e).capacity()));
    return law(e).density_of_flow(flow);
}

double CongestionModel::flow_derivative(int e, double rho) const {
    if (!(rho >= 0.0))
        throw NegativeDensity("density " + std::to_string(rho) + " on link " + std::to_string(e));
    return law(e).flow_derivative(rho);
}

double CongestionModel::delay(int e, double flow) const {
    if (!(flow >= 0.0))
        throw NegativeFlow("flow " + std::to_string(flow) + " on link " + std::to_string(e));
    const LinkLaw& l = law(e);
    if (flow >= l.capacity()) return kInf;
    if (flow < kZeroFlowBranch) return 1.0 / l.flow_derivative(0.0);
    return l.density_of_flow(flow) / flow;
}

std::vector<double> CongestionModel::flows_of_densities(std::span<const double> rho) const {
    std::vector<double> f(rho.size());
    for (std::size_t e = 0; e < rho.size(); ++e)
        f[e] = flow_of_density(static_cast<int>(e), rho[e]);
    return f;
}

std::vector<double> CongestionModel::densities_of_flows(std::span<const double> flow) const {
    std::vector<double> r(flow.size());
    for (std::size_t e = 0; e < flow.size(); ++e)
        r[e] = density_of_flow(static_cast<int>(e), flow[e]);
    return r;
}

std::vector<double> CongestionModel::delays(std::span<const double> flow) const {
    std::vector<double> t(flow.size());
    for (std::size_t e = 0; e < flow.size(); ++e) t[e] = delay(static_cast<int>(e), flow[e]);
    return t;
}

std::vector<double> CongestionModel::capacities() const {
    std::vector<double> c(laws_.size());
    for (std::size_t e = 0; e < laws_.size(); ++e) c[e] = laws_[e]->capacity();
    return c;
}

}  // namespace routeflow
