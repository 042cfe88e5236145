#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace g3 {

// Deterministic random source. mt19937_64 has a fully specified output sequence,
// and all variate transforms below are fixed algorithms, so identical seeds give
// identical streams on every platform (std::<distribution> types do not promise
// that and are avoided on purpose).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream derived from the root seed and a stream name
    // ("data", "init", "train", "sample", ...).
    Rng substream(std::string_view name) const;
    // Indexed variant, e.g. one stream per generated sample.
    Rng substream(std::string_view name, std::uint64_t index) const;

    std::uint64_t bits();                       // raw 64 bits
    double uniform();                           // [0, 1)
    double uniform(double lo, double hi);       // [lo, hi)
    std::uint64_t uniform_int(std::uint64_t n); // {0, ..., n-1}, unbiased
    double normal();                            // standard normal (Box-Muller)
    double normal(double mean, double stddev);
    double gamma(double shape);                 // unit scale, Marsaglia-Tsang
    Eigen::VectorXd dirichlet(int n, double alpha);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t root_seed_;
    std::mt19937_64 gen_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace g3
