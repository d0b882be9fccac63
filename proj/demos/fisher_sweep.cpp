// Prints the information gain of correlated pairs over uncorrelated ones for
// continuous and split detection as the correlation strengthens.

#include <cstdio>

#include "biphoton/inference.hpp"

int main() {
    using namespace biphoton;
    std::printf("%8s %14s %14s %12s %12s\n", "eps", "I_continuous", "I_split",
                "gain_cont", "gain_split");
    for (double eps : {1.0, 0.75, 0.5, 0.25, 0.1, 0.05}) {
        const BiphotonModel m{1.0, eps, 0.0};
        std::printf("%8.2f %14.4f %14.4f %12.3f %12.3f\n", eps,
                    fisher_continuous(m).value, fisher_split(m).value,
                    fisher_ratio(m, Scheme::continuous),
                    fisher_ratio(m, Scheme::split));
    }
    return 0;
}
