// Reconstructs an even cat state from its exact tomogram and from a simulated
// sampling campaign, then prints a few coherent-basis elements and fidelities.

#include <cstdio>

#include "symplectomo.hpp"

using namespace symplectomo;

int main() {
  const OneModeState cat = EvenCat{1.0, 1.0};
  const auto settings = unit_circle_settings(32);
  const auto tomogram = tabulate_tomogram(cat, settings);

  ReconstructionConfig cfg;
  cfg.dim = 30;
  const auto from_tomogram = reconstruct_from_tomogram(tomogram, cfg);
  const auto exact = density_matrix(cat, cfg.dim);
  std::printf("tomogram: trace error %.2e, fidelity %.6f\n", from_tomogram.trace_error,
              fidelity(from_tomogram.rho, exact));

  const auto batches = sample_campaign(cat, CircleSchedule{32}, 3125, 2024);
  const auto from_samples = reconstruct_from_samples(batches, cfg);
  std::printf("samples (1e5): fidelity %.4f, trace distance %.4f\n", fidelity(from_samples.rho, exact),
              trace_distance(from_samples.rho, exact));

  std::printf("\n  alpha      beta       <alpha|rho|beta> (reconstructed)   exact\n");
  const Complex points[] = {{0, 0}, {0.5, 0.5}, {1, 1}, {1, -1}, {-0.5, 0.2}};
  for (const Complex a : points) {
    for (const Complex b : {Complex(0, 0), Complex(1, 1)}) {
      const Complex got = coherent_element(from_tomogram.rho, a, b), want = coherent_element(exact, a, b);
      std::printf("  %+4.1f%+4.1fi  %+4.1f%+4.1fi  %+.6f%+.6fi   %+.6f%+.6fi\n", a.real(), a.imag(), b.real(), b.imag(),
                  got.real(), got.imag(), want.real(), want.imag());
    }
  }
  return 0;
}
