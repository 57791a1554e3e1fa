#include "kftune/benchmarks.hpp"

#include <map>

namespace kftune {

namespace {

constexpr double kMass = 1.0;
constexpr double kSpring = 1.0;
constexpr double kDamping = 0.2;

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

ContinuousModel tracking1d(const Vector& p) {
    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    Matrix G(2, 1);
    G << 0, 1;
    Matrix Gamma(2, 1);
    Gamma << 0, 1;
    Matrix H(1, 2);
    H << 1, 0;
    return {A, G, Gamma, H, p.head(1).asDiagonal(), p.tail(1).asDiagonal()};
}

ContinuousModel msd(const Vector& p) {
    Matrix A(2, 2);
    A << 0, 1, -kSpring / kMass, -kDamping / kMass;
    Matrix G(2, 1);
    G << 0, 1.0 / kMass;
    Matrix Gamma(2, 1);
    Gamma << 0, 1;
    Matrix H(1, 2);
    H << 1, 0;
    return {A, G, Gamma, H, p.head(1).asDiagonal(), p.tail(1).asDiagonal()};
}

ContinuousModel tracking2d(const Vector& p) {
    Matrix A = Matrix::Zero(4, 4);
    A(0, 2) = 1;
    A(1, 3) = 1;
    Matrix G(4, 1);
    G << 0, 0, 1, 1;
    Matrix Gamma = Matrix::Zero(4, 2);
    Gamma(2, 0) = 1;
    Gamma(3, 1) = 1;
    Matrix H = Matrix::Zero(2, 4);
    H(0, 0) = 1;
    H(1, 1) = 1;
    return {A, G, Gamma, H, p.head(2).asDiagonal(), p.tail(2).asDiagonal()};
}

ContinuousModel cascade_msd(const Vector& p) {
    const double k = kSpring / kMass;
    const double b = kDamping / kMass;
    Matrix A(6, 6);
    A << 0, 1, 0, 0, 0, 0,
        -2 * k, -2 * b, k, b, 0, 0,
        0, 0, 0, 1, 0, 0,
        k, b, -2 * k, -2 * b, k, b,
        0, 0, 0, 0, 0, 1,
        0, 0, k, b, -k, -b;
    Matrix G = Matrix::Zero(6, 1);
    G(5, 0) = 1;
    Matrix H = Matrix::Zero(3, 6);
    H(0, 0) = 1;
    H(1, 2) = 1;
    H(2, 4) = 1;
    Matrix Gamma = Matrix::Zero(6, 3);
    Gamma(1, 0) = 1;
    Gamma(3, 1) = 1;
    Gamma(5, 2) = 1;
    return {A, G, Gamma, H, p.head(3).asDiagonal(), p.tail(3).asDiagonal()};
}

std::map<std::string, BenchmarkSpec> make_specs() {
    const ControlSignal drive{2.0, 0.75};
    std::map<std::string, BenchmarkSpec> specs;
    specs["tracking1d"] = {"tracking1d", "1D constant-velocity robot, position measured",
                           {"v", "w"}, vec({1.0, 0.1}),
                           SearchSpace(vec({0.1, 0.01}), vec({5.0, 0.5})), {0.1, 0.5}, drive};
    specs["msd"] = {"msd", "mass-spring-damper (m=1, k=1, b=0.2), position measured",
                    {"v", "w"}, vec({1.0, 0.1}),
                    SearchSpace(vec({0.1, 0.01}), vec({5.0, 0.5})), {0.1, 0.5}, drive};
    specs["tracking2d"] = {"tracking2d", "2D constant-velocity target, x/y position measured",
                           {"v0", "v1", "w0", "w1"}, vec({1.0, 2.0, 0.2, 0.1}),
                           SearchSpace(vec({0.1, 0.1, 0.01, 0.01}), vec({5.0, 5.0, 0.5, 0.5})),
                           {0.1, 0.5}, drive};
    specs["cascade_msd"] = {"cascade_msd", "three cascaded mass-spring-dampers, positions measured",
                            {"v0", "v1", "v2", "w0", "w1", "w2"},
                            vec({1.0, 2.0, 3.0, 0.2, 0.1, 0.15}),
                            SearchSpace(vec({0.1, 0.1, 0.1, 0.01, 0.01, 0.01}),
                                        vec({5.0, 5.0, 5.0, 1.0, 1.0, 1.0})),
                            {0.1, 0.25, 0.5, 1.0}, drive};
    return specs;
}

const std::map<std::string, BenchmarkSpec>& specs() {
    static const auto table = make_specs();
    return table;
}

}  // namespace

const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names{"tracking1d", "msd", "tracking2d", "cascade_msd"};
    return names;
}

const BenchmarkSpec& benchmark_spec(const std::string& name) {
    const auto it = specs().find(name);
    if (it == specs().end()) throw DomainError("unknown benchmark system '" + name + "'");
    return it->second;
}

ContinuousModel build(const std::string& name, const Vector& params) {
    const BenchmarkSpec& spec = benchmark_spec(name);
    if (params.size() != static_cast<Eigen::Index>(spec.free_params.size())) {
        throw DimensionError(name + " expects " + std::to_string(spec.free_params.size()) +
                             " noise parameters, got " + std::to_string(params.size()));
    }
    if (!params.allFinite() || (params.array() <= 0.0).any()) {
        throw DomainError(name + ": noise intensities must be positive");
    }
    if (name == "tracking1d") return tracking1d(params);
    if (name == "msd") return msd(params);
    if (name == "tracking2d") return tracking2d(params);
    return cascade_msd(params);
}

}  // namespace kftune
