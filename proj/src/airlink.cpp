#include "gfscma/airlink.hpp"

#include <cmath>

#include "gfscma/error.hpp"

namespace gfscma {

ActivityVector sample_activity(const ActivityPrior& prior, int n_users, Rng& rng) {
  if (prior.p_bar < 0.0 || prior.p_bar > 1.0) {
    throw Error("config_invalid", "activity probability must be in [0,1]");
  }
  if (n_users < 0) {
    throw Error("config_invalid", "sample_activity: negative user count");
  }
  ActivityVector v;
  v.delta.resize(static_cast<size_t>(n_users));
  for (int n = 0; n < n_users; ++n) {
    v.delta[static_cast<size_t>(n)] = rng.next_bernoulli(prior.p_bar) ? 1 : 0;
  }
  return v;
}

double sample_snr(double lo_db, double hi_db, Rng& rng) {
  if (lo_db > hi_db) {
    throw Error("config_invalid", "sample_snr: reversed bounds");
  }
  return rng.next_uniform(lo_db, hi_db);
}

double snr_to_noise_var(double snr_db, double signal_per_element_energy) {
  if (!(signal_per_element_energy > 0.0)) {
    throw Error("config_invalid", "snr_to_noise_var: energy must be positive");
  }
  return signal_per_element_energy / std::pow(10.0, snr_db / 10.0);
}

ChannelRealization awgn_channel(int n_users, double snr_db) {
  ChannelRealization c;
  c.h.assign(static_cast<size_t>(n_users), cplx(1.0, 0.0));
  c.snr_db = snr_db;
  return c;
}

namespace {

void add_awgn(std::vector<cplx>& y, double noise_var, Rng& rng) {
  if (noise_var < 0.0) {
    throw Error("config_invalid", "noise variance must be nonnegative");
  }
  if (noise_var == 0.0) return;
  const double s = std::sqrt(noise_var / 2.0);
  for (cplx& v : y) {
    v += cplx(s * rng.next_gaussian(), s * rng.next_gaussian());
  }
}

}  // namespace

std::vector<cplx> superpose_preamble(const ActivityVector& delta,
                                     const std::vector<cplx>& preambles, int k_preamble,
                                     const ChannelRealization& chan, double noise_var, Rng& rng) {
  const size_t n_users = delta.delta.size();
  if (preambles.size() != n_users * static_cast<size_t>(k_preamble)) {
    throw Error("config_invalid", "superpose_preamble: preamble matrix shape mismatch");
  }
  if (chan.h.size() != n_users) {
    throw Error("config_invalid", "superpose_preamble: channel length mismatch");
  }
  std::vector<cplx> y(static_cast<size_t>(k_preamble), cplx(0.0, 0.0));
  for (size_t n = 0; n < n_users; ++n) {
    if (!delta.delta[n]) continue;
    const cplx* p = preambles.data() + n * static_cast<size_t>(k_preamble);
    for (int k = 0; k < k_preamble; ++k) y[static_cast<size_t>(k)] += chan.h[n] * p[k];
  }
  add_awgn(y, noise_var, rng);
  return y;
}

std::vector<cplx> superpose_data(const ActivityVector& delta, const std::vector<CtuPayload>& ctus,
                                 const ChannelRealization& chan, double noise_var, Rng& rng,
                                 int l_slots, int k_data) {
  const size_t n_users = delta.delta.size();
  if (chan.h.size() != n_users) {
    throw Error("config_invalid", "superpose_data: channel length mismatch");
  }
  std::vector<cplx> y(static_cast<size_t>(l_slots) * k_data, cplx(0.0, 0.0));
  size_t next = 0;
  for (size_t n = 0; n < n_users; ++n) {
    if (!delta.delta[n]) continue;
    if (next >= ctus.size() || ctus[next].user_index != static_cast<int>(n)) {
      throw Error("config_invalid",
                  "superpose_data: missing CTU payload for active user " + std::to_string(n));
    }
    const CtuPayload& ctu = ctus[next++];
    if (ctu.l_slots != l_slots || ctu.k_data != k_data) {
      throw Error("config_invalid", "superpose_data: CTU shape mismatch for user " + std::to_string(n));
    }
    for (int l = 0; l < l_slots; ++l) {
      const cplx* w = ctu.row(l);
      cplx* row = y.data() + static_cast<size_t>(l) * k_data;
      for (int k = 0; k < k_data; ++k) row[k] += chan.h[n] * w[k];
    }
  }
  if (next != ctus.size()) {
    throw Error("config_invalid", "superpose_data: more CTU payloads than active users");
  }
  // One noise draw order: row 0 fully, then row 1, ...
  add_awgn(y, noise_var, rng);
  return y;
}

}  // namespace gfscma
