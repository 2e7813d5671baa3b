// Simulate k parallel AR(1) series, fit beta under each Sigma model and print
// the closed-form information next to the estimate.

#include <cstdio>

#include "parseries/parseries.hpp"

int main() {
    using namespace parseries;
    const Ar1Model ar1(40);
    const auto bundle = gamma_of(ar1, 0.6);
    const Matrix y = sample_gaussian(bundle.gamma, build_sigma(ScalarVar{2.0}, 5), 2024);

    for (auto model : {ModelKind::I, ModelKind::II, ModelKind::III}) {
        const auto fit = fit_beta(y, ar1, model);
        std::printf("model %-3s beta_hat = %.4f  se = %.4f  loglik = %.3f\n", std::string(to_string(model)).c_str(),
                    fit.beta_hat, fit.se, fit.loglik_at_max);
    }
    for (std::size_t k : {1, 5, 20, 39, 40})
        std::printf("k = %2zu  info(III) = %.3f\n", k, expected_info(k, bundle, ModelKind::III));
}
