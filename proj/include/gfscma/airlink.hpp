/**
 * @file airlink.hpp
 * @brief Activity sampling, signal superposition, and AWGN for a contention region.
 *
 * SNR convention: per-complex-element signal energy of one active user.
 * A unit-norm preamble over K_p elements has per-element energy 1/K_p and a
 * unit-energy codeword over K_d elements has 1/K_d, so
 *   noise_var_preamble = 10^(-snr/10) / K_p
 *   noise_var_data     = 10^(-snr/10) / K_d
 * which equalizes per-element SNR across the preamble and data fields.
 */
#pragma once

#include <vector>

#include "gfscma/codebook.hpp"
#include "gfscma/rng.hpp"

namespace gfscma {

struct ActivityVector {
  std::vector<uint8_t> delta;  // entries in {0,1}

  int active_count() const {
    int c = 0;
    for (uint8_t d : delta) c += d;
    return c;
  }
};

struct ActivityPrior {
  double p_bar = 0.0;  // in [0,1]
};

/// Flat per-user channel; h_n == 1 under AWGN mode.
struct ChannelRealization {
  std::vector<cplx> h;
  double snr_db = 0.0;
};

struct ReceivedFrame {
  std::vector<cplx> y_p;  // K_p
  std::vector<cplx> y_d;  // row-major L x K_d
  int l_slots = 0;
  int k_data = 0;
};

/// i.i.d. Bernoulli(p_bar) activity over n_users.
ActivityVector sample_activity(const ActivityPrior& prior, int n_users, Rng& rng);

/// Uniform SNR draw in [lo_db, hi_db].
double sample_snr(double lo_db, double hi_db, Rng& rng);

/// noise_var = signal_per_element_energy / 10^(snr_db/10).
double snr_to_noise_var(double snr_db, double signal_per_element_energy);

/// All-ones channel for n users (AWGN mode).
ChannelRealization awgn_channel(int n_users, double snr_db);

/// y_p = sum_n delta_n * h_n * p_n + noise. preambles is row-major N x K_p.
/// Noise is circularly symmetric complex Gaussian with per-element variance
/// noise_var (real and imaginary parts each noise_var/2).
std::vector<cplx> superpose_preamble(const ActivityVector& delta,
                                     const std::vector<cplx>& preambles, int k_preamble,
                                     const ChannelRealization& chan, double noise_var, Rng& rng);

/// Row l = sum over active users of h_n * w_l^(nu(n)) + noise, independent
/// noise across rows. `ctus` must hold exactly one payload per active user.
std::vector<cplx> superpose_data(const ActivityVector& delta, const std::vector<CtuPayload>& ctus,
                                 const ChannelRealization& chan, double noise_var, Rng& rng,
                                 int l_slots, int k_data);

}  // namespace gfscma
