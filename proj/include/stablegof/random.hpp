#pragma once

#include <cstdint>
#include <random>

namespace stablegof {

// Uniform (0,1) stream over mt19937_64. One per worker; not shareable.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    // 53 random bits mapped to the open interval (0,1).
    double operator()() {
        for (;;) {
            const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }
    std::mt19937_64& engine() { return eng_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

// SplitMix64 finalizer: decorrelated per-replication seeds from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

double rand_normal(UniformSource& u);                 // N(0,1)
double rand_student_t(double dof, UniformSource& u);  // dof = inf gives N(0,1)

}  // namespace stablegof
