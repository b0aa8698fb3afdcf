#include "stablegof/random.hpp"

#include <cmath>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

namespace stablegof {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double rand_normal(UniformSource& u) {
    boost::random::normal_distribution<double> nd(0.0, 1.0);
    return nd(u.engine());
}

double rand_student_t(double dof, UniformSource& u) {
    if (std::isinf(dof)) return rand_normal(u);
    boost::random::student_t_distribution<double> td(dof);
    return td(u.engine());
}

}  // namespace stablegof
