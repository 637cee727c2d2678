#include "ttr/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ttr/kernels/kernels.hpp"
#include "ttr/rules/condition.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"

namespace ttr::nn {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;

  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

// bc1 = 1 - beta1^t, bc2 = 1 - beta2^t for the shared step counter t.
void adam_step(std::vector<double>& p, const std::vector<double>& g,
               AdamState& s, double lr, double bc1, double bc2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    s.m[i] = kAdamBeta1 * s.m[i] + (1.0 - kAdamBeta1) * g[i];
    s.v[i] = kAdamBeta2 * s.v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
    p[i] -= lr * (s.m[i] / bc1) / (std::sqrt(s.v[i] / bc2) + kAdamEps);
  }
}

// Straight-through window: hard steps pass gradient only where the
// pre-activation lies in [-1, 1].
inline double ste_gate(double pre) { return std::abs(pre) <= 1.0 ? 1.0 : 0.0; }

// Per-channel mean and population variance of a row-major rows x channels
// block. `ones` must hold at least `channels` entries equal to 1.
void batch_stats(const double* act, std::size_t rows, std::size_t channels,
                 std::vector<double>& mean, std::vector<double>& var,
                 const std::vector<double>& ones, std::vector<double>& neg,
                 std::vector<double>& scratch) {
  const auto& kb = kernels::active();
  mean.assign(channels, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    kb.add(mean.data(), act + i * channels, channels);
  }
  const double inv_n = 1.0 / static_cast<double>(rows);
  for (double& m : mean) m *= inv_n;
  for (std::size_t c = 0; c < channels; ++c) neg[c] = -mean[c];
  var.assign(channels, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    kb.scale_shift(scratch.data(), act + i * channels, ones.data(), neg.data(),
                   channels);
    kb.accumulate_sq(var.data(), scratch.data(), channels);
  }
  for (double& v : var) v *= inv_n;
}

// Running estimates track the batch statistics with momentum; the variance
// estimate is unbiased over `count` samples.
void update_running(BatchNormParams& bn, const std::vector<double>& mean,
                    const std::vector<double>& var, std::size_t count) {
  const double m = BatchNormParams::kMomentum;
  const double unbias =
      count > 1 ? static_cast<double>(count) / static_cast<double>(count - 1)
                : 1.0;
  for (std::size_t c = 0; c < bn.channels(); ++c) {
    bn.running_mean[c] = (1.0 - m) * bn.running_mean[c] + m * mean[c];
    bn.running_var[c] = (1.0 - m) * bn.running_var[c] + m * var[c] * unbias;
  }
}

TTnetModel init_model(const data::Dataset& ds, const TrainConfig& cfg,
                      Rng& rng) {
  TTnetModel model;
  model.schema = ds.schema;
  model.task = ds.task;
  model.num_classes =
      ds.task == data::Task::Regression ? 1 : ds.num_classes;
  model.class_labels = ds.class_labels;
  model.head_mode = cfg.head_mode;
  model.dropout_p = cfg.head_mode == HeadMode::Float ? cfg.dropout_p : 0.0;
  model.seed = cfg.seed;
  model.config_digest = cfg.config_digest;
  model.target_affine = ds.target_affine;

  const std::size_t width = ds.schema.size();
  model.input_bn.init(width);

  const std::size_t a_count = static_cast<std::size_t>(cfg.block.amplification);
  const std::size_t k1 = static_cast<std::size_t>(cfg.block.kernel1);
  const std::size_t k2 = static_cast<std::size_t>(cfg.block.kernel2);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(k1));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(a_count * k2));
  model.blocks.resize(static_cast<std::size_t>(cfg.filters));
  for (LttBlockParams& blk : model.blocks) {
    blk.spec = cfg.block;
    blk.w1.resize(a_count * k1);
    for (double& w : blk.w1) w = rng.uniform(-bound1, bound1);
    blk.w2.resize(k2 * a_count);
    for (double& w : blk.w2) w = rng.uniform(-bound2, bound2);
    blk.inner_bn.init(a_count);
  }

  const std::size_t patches =
      static_cast<std::size_t>(cfg.block.patch_count(width));
  const std::size_t slots = static_cast<std::size_t>(cfg.filters) * patches;
  model.final_bn.init(slots);

  const std::size_t classes = model.num_classes;
  model.head_w.resize(slots * classes);
  for (double& w : model.head_w) w = rng.normal(0.0, 0.01);
  if (cfg.head_mode == HeadMode::BinarySparse) {
    // Gate latents start positive: every weight participates until the
    // optimizer turns it off. The margin is a few dozen Adam steps wide so
    // early sign noise cannot kill a site for good.
    model.head_mask.assign(slots * classes, 0.2);
  }
  model.head_bias.assign(classes, 0.0);
  return model;
}

// Activation layout per example: c1/relu/dmid hold [F][P][K2][A] at index
// ((f * P + p) * K2 + t) * A + a; slot tensors hold [F][P] at f * P + p.
class Trainer {
 public:
  Trainer(const data::Dataset& ds, const TrainConfig& cfg, TTnetModel& model,
          Rng& rng)
      : ds_(ds), cfg_(cfg), model_(model), rng_(rng) {
    const LttBlockSpec& spec = model.block_spec();
    L_ = model.schema.size();
    F_ = model.filters();
    A_ = static_cast<std::size_t>(spec.amplification);
    K1_ = static_cast<std::size_t>(spec.kernel1);
    K2_ = static_cast<std::size_t>(spec.kernel2);
    P_ = model.patches();
    S_ = model.slots();
    C_ = model.num_classes;
    stride_ = static_cast<std::size_t>(spec.stride);
    inner_ = spec.has_inner_bn;
    mid_f_ = P_ * K2_ * A_;
    mid_i_ = F_ * mid_f_;

    const std::size_t chan = std::max({L_, A_, S_});
    ones_.assign(chan, 1.0);
    neg_.resize(chan);
    scratch_.resize(chan);

    mu_bn_.resize(F_);
    var_bn_.resize(F_);
    inv_bn_.resize(F_);
    g_w1_.resize(F_);
    g_w2_.resize(F_);
    g_bn_gamma_.resize(F_);
    g_bn_beta_.resize(F_);

    a_in_gamma_.init(L_);
    a_in_beta_.init(L_);
    a_w1_.resize(F_);
    a_w2_.resize(F_);
    a_bn_gamma_.resize(F_);
    a_bn_beta_.resize(F_);
    for (std::size_t f = 0; f < F_; ++f) {
      a_w1_[f].init(A_ * K1_);
      a_w2_[f].init(K2_ * A_);
      if (inner_) {
        a_bn_gamma_[f].init(A_);
        a_bn_beta_[f].init(A_);
      }
    }
    a_fin_gamma_.init(S_);
    a_fin_beta_.init(S_);
    a_head_w_.init(S_ * C_);
    a_head_bias_.init(C_);
    if (model.head_mode == HeadMode::BinarySparse) a_head_mask_.init(S_ * C_);
  }

  // Forward, loss, backward, and one Adam step over one minibatch of row
  // indices. Returns the mean batch loss.
  double run_batch(std::span<const std::uint32_t> batch,
                   const std::vector<double>& target) {
    const std::size_t B = batch.size();
    const auto& kb = kernels::active();

    xraw_.resize(B * L_);
    for (std::size_t i = 0; i < B; ++i) {
      const float* src = ds_.x.data() + static_cast<std::size_t>(batch[i]) * L_;
      double* dst = xraw_.data() + i * L_;
      for (std::size_t j = 0; j < L_; ++j) dst[j] = static_cast<double>(src[j]);
    }

    // Input batch norm on batch statistics, then step with STE bookkeeping.
    batch_stats(xraw_.data(), B, L_, mu_in_, var_in_, ones_, neg_, scratch_);
    update_running(model_.input_bn, mu_in_, var_in_, B);
    inv_in_.resize(L_);
    scale_in_.resize(L_);
    shift_in_.resize(L_);
    for (std::size_t j = 0; j < L_; ++j) {
      inv_in_[j] = 1.0 / std::sqrt(var_in_[j] + BatchNormParams::kEpsilon);
      scale_in_[j] = model_.input_bn.gamma[j] * inv_in_[j];
      shift_in_[j] = model_.input_bn.beta[j] - mu_in_[j] * scale_in_[j];
    }
    xh_.resize(B * L_);
    bbit_.resize(B * L_);
    for (std::size_t i = 0; i < B; ++i) {
      kb.scale_shift(xh_.data() + i * L_, xraw_.data() + i * L_,
                     scale_in_.data(), shift_in_.data(), L_);
    }
    for (std::size_t i = 0; i < B * L_; ++i) {
      bbit_[i] = static_cast<std::uint8_t>(bin_act(xh_[i]));
    }

    // Conv-1: channel a of window position t sums w1 taps over set bits.
    c1_.resize(B * mid_i_);
    for (std::size_t i = 0; i < B; ++i) {
      const std::uint8_t* bits = bbit_.data() + i * L_;
      for (std::size_t f = 0; f < F_; ++f) {
        const double* w1 = model_.blocks[f].w1.data();
        double* out = c1_.data() + i * mid_i_ + f * mid_f_;
        for (std::size_t p = 0; p < P_; ++p) {
          const std::uint8_t* window = bits + p * stride_;
          for (std::size_t t = 0; t < K2_; ++t) {
            double* slot = out + (p * K2_ + t) * A_;
            for (std::size_t a = 0; a < A_; ++a) {
              const double* taps = w1 + a * K1_;
              double acc = 0.0;
              for (std::size_t q = 0; q < K1_; ++q) {
                if (window[t + q]) acc += taps[q];
              }
              slot[a] = acc;
            }
          }
        }
      }
    }

    // Inner batch norm over channels (samples = B * P * K2), then ReLU.
    relu_.resize(B * mid_i_);
    if (inner_) {
      const std::size_t groups = B * P_ * K2_;
      const double inv_n = 1.0 / static_cast<double>(groups);
      for (std::size_t f = 0; f < F_; ++f) {
        BatchNormParams& bn = model_.blocks[f].inner_bn;
        std::vector<double>& mu = mu_bn_[f];
        std::vector<double>& var = var_bn_[f];
        std::vector<double>& inv = inv_bn_[f];
        mu.assign(A_, 0.0);
        for (std::size_t i = 0; i < B; ++i) {
          const double* base = c1_.data() + i * mid_i_ + f * mid_f_;
          for (std::size_t g = 0; g < P_ * K2_; ++g) {
            kb.add(mu.data(), base + g * A_, A_);
          }
        }
        for (double& m : mu) m *= inv_n;
        for (std::size_t a = 0; a < A_; ++a) neg_[a] = -mu[a];
        var.assign(A_, 0.0);
        for (std::size_t i = 0; i < B; ++i) {
          const double* base = c1_.data() + i * mid_i_ + f * mid_f_;
          for (std::size_t g = 0; g < P_ * K2_; ++g) {
            kb.scale_shift(scratch_.data(), base + g * A_, ones_.data(),
                           neg_.data(), A_);
            kb.accumulate_sq(var.data(), scratch_.data(), A_);
          }
        }
        for (double& v : var) v *= inv_n;
        update_running(bn, mu, var, groups);
        inv.resize(A_);
        for (std::size_t a = 0; a < A_; ++a) {
          inv[a] = 1.0 / std::sqrt(var[a] + BatchNormParams::kEpsilon);
          scratch_[a] = bn.gamma[a] * inv[a];
          neg_[a] = bn.beta[a] - mu[a] * scratch_[a];
        }
        for (std::size_t i = 0; i < B; ++i) {
          const double* src = c1_.data() + i * mid_i_ + f * mid_f_;
          double* dst = relu_.data() + i * mid_i_ + f * mid_f_;
          for (std::size_t g = 0; g < P_ * K2_; ++g) {
            kb.scale_shift(dst + g * A_, src + g * A_, scratch_.data(),
                           neg_.data(), A_);
          }
        }
      }
    } else {
      std::copy(c1_.begin(), c1_.begin() + static_cast<std::ptrdiff_t>(B * mid_i_),
                relu_.begin());
    }
    for (std::size_t i = 0; i < B * mid_i_; ++i) {
      if (relu_[i] < 0.0) relu_[i] = 0.0;
    }

    // Conv-2 collapses [K2][A] per patch to the slot pre-activation, which
    // then steps to the slot bit.
    c2_.resize(B * S_);
    zbit_.resize(B * S_);
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t f = 0; f < F_; ++f) {
        const double* w2 = model_.blocks[f].w2.data();
        const double* rf = relu_.data() + i * mid_i_ + f * mid_f_;
        for (std::size_t p = 0; p < P_; ++p) {
          const double pre = kb.dot(w2, rf + p * K2_ * A_, K2_ * A_);
          c2_[i * S_ + f * P_ + p] = pre;
          zbit_[i * S_ + f * P_ + p] = static_cast<std::uint8_t>(bin_act(pre));
        }
      }
    }

    // Final batch norm over slots; slot bits are 0/1 so the population
    // variance is p(1-p).
    mu_fin_.assign(S_, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      const std::uint8_t* z = zbit_.data() + i * S_;
      for (std::size_t r = 0; r < S_; ++r) mu_fin_[r] += z[r];
    }
    var_fin_.resize(S_);
    inv_fin_.resize(S_);
    scale_fin_.resize(S_);
    shift_fin_.resize(S_);
    const double inv_b = 1.0 / static_cast<double>(B);
    for (std::size_t r = 0; r < S_; ++r) {
      mu_fin_[r] *= inv_b;
      var_fin_[r] = mu_fin_[r] * (1.0 - mu_fin_[r]);
    }
    update_running(model_.final_bn, mu_fin_, var_fin_, B);
    for (std::size_t r = 0; r < S_; ++r) {
      inv_fin_[r] = 1.0 / std::sqrt(var_fin_[r] + BatchNormParams::kEpsilon);
      scale_fin_[r] = model_.final_bn.gamma[r] * inv_fin_[r];
      shift_fin_[r] = model_.final_bn.beta[r] - mu_fin_[r] * scale_fin_[r];
    }
    zh_.resize(B * S_);
    for (std::size_t i = 0; i < B; ++i) {
      const std::uint8_t* z = zbit_.data() + i * S_;
      double* out = zh_.data() + i * S_;
      for (std::size_t r = 0; r < S_; ++r) {
        out[r] = z[r] ? scale_fin_[r] + shift_fin_[r] : shift_fin_[r];
      }
    }

    const bool use_dropout =
        model_.head_mode == HeadMode::Float && model_.dropout_p > 0.0;
    if (use_dropout) {
      const double keep_scale = 1.0 / (1.0 - model_.dropout_p);
      keep_.resize(B * S_);
      for (std::size_t i = 0; i < B * S_; ++i) {
        keep_[i] = rng_.bernoulli(model_.dropout_p) ? 0 : 1;
        zh_[i] = keep_[i] ? zh_[i] * keep_scale : 0.0;
      }
    }

    // Head forward on effective weights.
    const bool sparse = model_.head_mode == HeadMode::BinarySparse;
    const std::vector<double>* wp = &model_.head_w;
    if (sparse) {
      weff_.resize(S_ * C_);
      for (std::size_t idx = 0; idx < S_ * C_; ++idx) {
        const double sign = model_.head_w[idx] < 0.0 ? -1.0 : 1.0;
        weff_[idx] = model_.head_mask[idx] > 0.0 ? sign : 0.0;
      }
      wp = &weff_;
    }
    scores_.resize(B * C_);
    for (std::size_t i = 0; i < B; ++i) {
      double* sc = scores_.data() + i * C_;
      for (std::size_t c = 0; c < C_; ++c) sc[c] = model_.head_bias[c];
      const double* z = zh_.data() + i * S_;
      for (std::size_t r = 0; r < S_; ++r) {
        const double zr = z[r];
        if (zr == 0.0) continue;
        const double* w = wp->data() + r * C_;
        for (std::size_t c = 0; c < C_; ++c) sc[c] += w[c] * zr;
      }
    }

    // Loss and score gradients, averaged over the batch.
    dscores_.resize(B * C_);
    double loss = 0.0;
    if (model_.task == data::Task::Regression) {
      for (std::size_t i = 0; i < B; ++i) {
        const double err = scores_[i] - target[batch[i]];
        loss += err * err;
        dscores_[i] = 2.0 * err * inv_b;
      }
    } else {
      for (std::size_t i = 0; i < B; ++i) {
        const double* sc = scores_.data() + i * C_;
        double mx = sc[0];
        for (std::size_t c = 1; c < C_; ++c) mx = std::max(mx, sc[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < C_; ++c) sum += std::exp(sc[c] - mx);
        const std::size_t y = static_cast<std::size_t>(target[batch[i]]);
        loss += std::log(sum) - (sc[y] - mx);
        for (std::size_t c = 0; c < C_; ++c) {
          const double p = std::exp(sc[c] - mx) / sum;
          dscores_[i * C_ + c] = (p - (c == y ? 1.0 : 0.0)) * inv_b;
        }
      }
    }
    loss *= inv_b;

    // Head backward: weight gradients land on the effective weights first.
    std::vector<double>& gw = sparse ? g_weff_ : g_head_w_;
    gw.assign(S_ * C_, 0.0);
    g_head_bias_.assign(C_, 0.0);
    dzh_.resize(B * S_);
    for (std::size_t i = 0; i < B; ++i) {
      const double* dsc = dscores_.data() + i * C_;
      const double* z = zh_.data() + i * S_;
      double* dz = dzh_.data() + i * S_;
      for (std::size_t c = 0; c < C_; ++c) g_head_bias_[c] += dsc[c];
      for (std::size_t r = 0; r < S_; ++r) {
        const double* w = wp->data() + r * C_;
        const double zr = z[r];
        double acc = 0.0;
        for (std::size_t c = 0; c < C_; ++c) {
          if (zr != 0.0) gw[r * C_ + c] += zr * dsc[c];
          acc += w[c] * dsc[c];
        }
        dz[r] = acc;
      }
    }
    if (use_dropout) {
      const double keep_scale = 1.0 / (1.0 - model_.dropout_p);
      for (std::size_t i = 0; i < B * S_; ++i) {
        dzh_[i] = keep_[i] ? dzh_[i] * keep_scale : 0.0;
      }
    }
    if (sparse) {
      g_head_w_.assign(S_ * C_, 0.0);
      g_head_mask_.assign(S_ * C_, 0.0);
      for (std::size_t idx = 0; idx < S_ * C_; ++idx) {
        const double lw = model_.head_w[idx];
        const double lm = model_.head_mask[idx];
        const double sign = lw < 0.0 ? -1.0 : 1.0;
        // The sign latent learns through the gate even while the site is
        // off; a gated-off weight would otherwise freeze at its initial
        // sign and never earn its way back in.
        g_head_w_[idx] = g_weff_[idx] * ste_gate(lw);
        g_head_mask_[idx] = g_weff_[idx] * sign * ste_gate(lm) +
                            cfg_.mask_weight_decay * lm;
      }
    }

    // Final BN backward; dgamma = sum(dy * xhat), dbeta = sum(dy), then
    // dx = gamma * inv * (dy - mean(dy) - xhat * mean(dy * xhat)). The slot
    // STE gate folds in immediately after, so dzh_ ends up holding dc2.
    g_fin_gamma_.assign(S_, 0.0);
    g_fin_beta_.assign(S_, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      const double* dz = dzh_.data() + i * S_;
      const std::uint8_t* z = zbit_.data() + i * S_;
      for (std::size_t r = 0; r < S_; ++r) {
        const double xhat = ((z[r] ? 1.0 : 0.0) - mu_fin_[r]) * inv_fin_[r];
        g_fin_gamma_[r] += dz[r] * xhat;
        g_fin_beta_[r] += dz[r];
      }
    }
    for (std::size_t i = 0; i < B; ++i) {
      double* dz = dzh_.data() + i * S_;
      const std::uint8_t* z = zbit_.data() + i * S_;
      for (std::size_t r = 0; r < S_; ++r) {
        const double xhat = ((z[r] ? 1.0 : 0.0) - mu_fin_[r]) * inv_fin_[r];
        const double grad =
            model_.final_bn.gamma[r] * inv_fin_[r] *
            (dz[r] - (g_fin_beta_[r] + xhat * g_fin_gamma_[r]) * inv_b);
        dz[r] = grad * ste_gate(c2_[i * S_ + r]);
      }
    }

    // Conv-2 backward, then the ReLU gate.
    for (std::size_t f = 0; f < F_; ++f) g_w2_[f].assign(K2_ * A_, 0.0);
    dmid_.resize(B * mid_i_);
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t f = 0; f < F_; ++f) {
        const double* w2 = model_.blocks[f].w2.data();
        double* gw2 = g_w2_[f].data();
        const double* rf = relu_.data() + i * mid_i_ + f * mid_f_;
        double* dm = dmid_.data() + i * mid_i_ + f * mid_f_;
        for (std::size_t p = 0; p < P_; ++p) {
          const double d = dzh_[i * S_ + f * P_ + p];
          const double* rp = rf + p * K2_ * A_;
          double* dp = dm + p * K2_ * A_;
          for (std::size_t ta = 0; ta < K2_ * A_; ++ta) {
            gw2[ta] += d * rp[ta];
            dp[ta] = d * w2[ta];
          }
        }
      }
    }
    for (std::size_t i = 0; i < B * mid_i_; ++i) {
      if (!(relu_[i] > 0.0)) dmid_[i] = 0.0;
    }

    // Inner BN backward turns dmid_ from d(post-BN) into d(conv-1 output).
    if (inner_) {
      const std::size_t groups = B * P_ * K2_;
      const double inv_n = 1.0 / static_cast<double>(groups);
      for (std::size_t f = 0; f < F_; ++f) {
        const BatchNormParams& bn = model_.blocks[f].inner_bn;
        const std::vector<double>& mu = mu_bn_[f];
        const std::vector<double>& inv = inv_bn_[f];
        std::vector<double>& gg = g_bn_gamma_[f];
        std::vector<double>& gb = g_bn_beta_[f];
        gg.assign(A_, 0.0);
        gb.assign(A_, 0.0);
        for (std::size_t i = 0; i < B; ++i) {
          const double* x = c1_.data() + i * mid_i_ + f * mid_f_;
          const double* d = dmid_.data() + i * mid_i_ + f * mid_f_;
          for (std::size_t g = 0; g < P_ * K2_; ++g) {
            for (std::size_t a = 0; a < A_; ++a) {
              const double xhat = (x[g * A_ + a] - mu[a]) * inv[a];
              gg[a] += d[g * A_ + a] * xhat;
              gb[a] += d[g * A_ + a];
            }
          }
        }
        for (std::size_t i = 0; i < B; ++i) {
          const double* x = c1_.data() + i * mid_i_ + f * mid_f_;
          double* d = dmid_.data() + i * mid_i_ + f * mid_f_;
          for (std::size_t g = 0; g < P_ * K2_; ++g) {
            for (std::size_t a = 0; a < A_; ++a) {
              const double xhat = (x[g * A_ + a] - mu[a]) * inv[a];
              d[g * A_ + a] = bn.gamma[a] * inv[a] *
                              (d[g * A_ + a] -
                               (gb[a] + xhat * gg[a]) * inv_n);
            }
          }
        }
      }
    }

    // Conv-1 backward: tap gradients where the input bit was set, input
    // gradients through every tap.
    for (std::size_t f = 0; f < F_; ++f) g_w1_[f].assign(A_ * K1_, 0.0);
    db_.assign(B * L_, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      const std::uint8_t* bits = bbit_.data() + i * L_;
      double* dbi = db_.data() + i * L_;
      for (std::size_t f = 0; f < F_; ++f) {
        const double* w1 = model_.blocks[f].w1.data();
        double* gw1 = g_w1_[f].data();
        const double* dm = dmid_.data() + i * mid_i_ + f * mid_f_;
        for (std::size_t p = 0; p < P_; ++p) {
          const std::size_t base = p * stride_;
          for (std::size_t t = 0; t < K2_; ++t) {
            const double* da = dm + (p * K2_ + t) * A_;
            for (std::size_t a = 0; a < A_; ++a) {
              const double d = da[a];
              if (d == 0.0) continue;
              const double* taps = w1 + a * K1_;
              double* gtaps = gw1 + a * K1_;
              for (std::size_t q = 0; q < K1_; ++q) {
                const std::size_t col = base + t + q;
                if (bits[col]) gtaps[q] += d;
                dbi[col] += d * taps[q];
              }
            }
          }
        }
      }
    }

    // Input STE, then input BN parameter gradients (no gradient past the
    // data).
    for (std::size_t i = 0; i < B * L_; ++i) db_[i] *= ste_gate(xh_[i]);
    g_in_gamma_.assign(L_, 0.0);
    g_in_beta_.assign(L_, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      const double* x = xraw_.data() + i * L_;
      const double* d = db_.data() + i * L_;
      for (std::size_t j = 0; j < L_; ++j) {
        const double xhat = (x[j] - mu_in_[j]) * inv_in_[j];
        g_in_gamma_[j] += d[j] * xhat;
        g_in_beta_[j] += d[j];
      }
    }

    // One shared Adam step across every parameter tensor.
    pow_b1_ *= kAdamBeta1;
    pow_b2_ *= kAdamBeta2;
    const double bc1 = 1.0 - pow_b1_;
    const double bc2 = 1.0 - pow_b2_;
    const double lr = cfg_.learning_rate;
    adam_step(model_.input_bn.gamma, g_in_gamma_, a_in_gamma_, lr, bc1, bc2);
    adam_step(model_.input_bn.beta, g_in_beta_, a_in_beta_, lr, bc1, bc2);
    for (std::size_t f = 0; f < F_; ++f) {
      adam_step(model_.blocks[f].w1, g_w1_[f], a_w1_[f], lr, bc1, bc2);
      adam_step(model_.blocks[f].w2, g_w2_[f], a_w2_[f], lr, bc1, bc2);
      if (inner_) {
        adam_step(model_.blocks[f].inner_bn.gamma, g_bn_gamma_[f],
                  a_bn_gamma_[f], lr, bc1, bc2);
        adam_step(model_.blocks[f].inner_bn.beta, g_bn_beta_[f],
                  a_bn_beta_[f], lr, bc1, bc2);
      }
    }
    adam_step(model_.final_bn.gamma, g_fin_gamma_, a_fin_gamma_, lr, bc1, bc2);
    adam_step(model_.final_bn.beta, g_fin_beta_, a_fin_beta_, lr, bc1, bc2);
    adam_step(model_.head_w, g_head_w_, a_head_w_, lr, bc1, bc2);
    if (sparse) {
      adam_step(model_.head_mask, g_head_mask_, a_head_mask_, lr, bc1, bc2);
    }
    adam_step(model_.head_bias, g_head_bias_, a_head_bias_, lr, bc1, bc2);
    return loss;
  }

 private:
  const data::Dataset& ds_;
  const TrainConfig& cfg_;
  TTnetModel& model_;
  Rng& rng_;

  std::size_t L_ = 0, F_ = 0, A_ = 0, K1_ = 0, K2_ = 0, P_ = 0, S_ = 0, C_ = 0;
  std::size_t stride_ = 0, mid_f_ = 0, mid_i_ = 0;
  bool inner_ = false;

  std::vector<double> xraw_, xh_, c1_, relu_, c2_, zh_, scores_;
  std::vector<std::uint8_t> bbit_, zbit_, keep_;
  std::vector<double> dscores_, dzh_, dmid_, db_;

  std::vector<double> mu_in_, var_in_, inv_in_, scale_in_, shift_in_;
  std::vector<std::vector<double>> mu_bn_, var_bn_, inv_bn_;
  std::vector<double> mu_fin_, var_fin_, inv_fin_, scale_fin_, shift_fin_;
  std::vector<double> ones_, neg_, scratch_;

  std::vector<double> g_in_gamma_, g_in_beta_;
  std::vector<std::vector<double>> g_w1_, g_w2_, g_bn_gamma_, g_bn_beta_;
  std::vector<double> g_fin_gamma_, g_fin_beta_;
  std::vector<double> g_head_w_, g_head_mask_, g_head_bias_, g_weff_, weff_;

  AdamState a_in_gamma_, a_in_beta_;
  std::vector<AdamState> a_w1_, a_w2_, a_bn_gamma_, a_bn_beta_;
  AdamState a_fin_gamma_, a_fin_beta_, a_head_w_, a_head_mask_, a_head_bias_;
  double pow_b1_ = 1.0, pow_b2_ = 1.0;
};

}  // namespace

void TrainConfig::validate() const {
  block.validate();
  if (filters < 1) throw ConfigError("train config: filters must be positive");
  if (epochs < 1) throw ConfigError("train config: epochs must be positive");
  if (batch_size < 1) {
    throw ConfigError("train config: batch size must be positive");
  }
  if (!(learning_rate > 0.0)) {
    throw ConfigError("train config: learning rate must be positive");
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ConfigError("train config: dropout probability outside [0, 1)");
  }
  if (mask_weight_decay < 0.0) {
    throw ConfigError("train config: mask weight decay must be non-negative");
  }
}

TTnetModel train(const data::Dataset& ds,
                 std::span<const std::uint32_t> train_rows,
                 const TrainConfig& config) {
  config.validate();
  if (train_rows.empty()) throw InputError("train: training fold is empty");
  for (const std::uint32_t r : train_rows) {
    if (r >= ds.rows) throw InputError("train: row index out of range");
  }
  if (ds.task != data::Task::Regression && ds.num_classes < 2) {
    throw InputError("train: classification needs at least two classes");
  }

  Rng rng(config.seed);
  TTnetModel model = init_model(ds, config, rng);

  // Targets in training units; regression re-standardizes over the fold and
  // composes the affine back to original units.
  std::vector<double> target(ds.y);
  if (ds.task == data::Task::Regression) {
    const data::TargetAffine fold = data::target_stats(ds, train_rows);
    const double sd = fold.sd > 0.0 ? fold.sd : 1.0;
    for (double& y : target) y = (y - fold.mean) / sd;
    model.target_affine = {
        ds.target_affine.mean + fold.mean * ds.target_affine.sd,
        sd * ds.target_affine.sd};
  }

  Trainer trainer(ds, config, model, rng);
  std::vector<std::uint32_t> order(train_rows.begin(), train_rows.end());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      const double loss =
          trainer.run_batch({order.data() + start, count}, target);
      if (!std::isfinite(loss)) {
        throw TrainingError("training diverged at epoch " +
                            std::to_string(epoch));
      }
    }
  }

  recompute_bn_stats(model, ds, train_rows);
  model.validate();
  return model;
}

void recompute_bn_stats(TTnetModel& model, const data::Dataset& ds,
                        std::span<const std::uint32_t> rows) {
  model.validate();
  if (rows.empty()) throw InputError("recompute_bn_stats: no rows");
  for (const std::uint32_t r : rows) {
    if (r >= ds.rows) throw InputError("recompute_bn_stats: row index out of range");
  }
  if (ds.schema.size() != model.schema.size()) {
    throw ContractError("recompute_bn_stats: dataset width != model width");
  }

  const auto& kb = kernels::active();
  const std::size_t width = model.schema.size();
  const double inv_n = 1.0 / static_cast<double>(rows.size());

  // Input layer statistics, two-pass.
  std::vector<double> xrow(width);
  std::vector<double> ones(width, 1.0);
  std::vector<double> neg(width);
  std::vector<double> scratch(width);
  std::vector<double> mean(width, 0.0);
  std::vector<double> var(width, 0.0);
  auto load_row = [&](std::uint32_t r) {
    const float* src = ds.x.data() + static_cast<std::size_t>(r) * width;
    for (std::size_t j = 0; j < width; ++j) {
      xrow[j] = static_cast<double>(src[j]);
    }
  };
  for (const std::uint32_t r : rows) {
    load_row(r);
    kb.add(mean.data(), xrow.data(), width);
  }
  for (double& m : mean) m *= inv_n;
  for (std::size_t j = 0; j < width; ++j) neg[j] = -mean[j];
  for (const std::uint32_t r : rows) {
    load_row(r);
    kb.scale_shift(scratch.data(), xrow.data(), ones.data(), neg.data(), width);
    kb.accumulate_sq(var.data(), scratch.data(), width);
  }
  for (double& v : var) v *= inv_n;
  model.input_bn.running_mean = mean;
  model.input_bn.running_var = var;

  // Binarization for every later layer goes through the same per-column
  // predicates inference uses.
  const std::vector<rules::Condition> conditions =
      rules::input_conditions(model.input_bn, model.schema);
  std::vector<std::uint8_t> bits(width);
  auto load_bits = [&](std::uint32_t r) {
    const float* src = ds.x.data() + static_cast<std::size_t>(r) * width;
    for (std::size_t j = 0; j < width; ++j) {
      bits[j] = conditions[j].holds(static_cast<double>(src[j])) ? 1 : 0;
    }
  };

  const LttBlockSpec& spec = model.block_spec();
  const std::size_t filters = model.filters();
  const std::size_t a_count = static_cast<std::size_t>(spec.amplification);
  const std::size_t k1 = static_cast<std::size_t>(spec.kernel1);
  const std::size_t k2 = static_cast<std::size_t>(spec.kernel2);
  const std::size_t patches = model.patches();
  const std::size_t stride = static_cast<std::size_t>(spec.stride);

  if (spec.has_inner_bn) {
    // Channel statistics per filter over rows x patches x window positions.
    const double inv_groups =
        1.0 / (static_cast<double>(rows.size()) *
               static_cast<double>(patches * k2));
    std::vector<double> slot(a_count);
    std::vector<std::vector<double>> mu(filters);
    std::vector<std::vector<double>> vr(filters);
    auto conv_slot = [&](const LttBlockParams& blk, std::size_t p,
                         std::size_t t) {
      for (std::size_t a = 0; a < a_count; ++a) {
        const double* taps = blk.w1.data() + a * k1;
        double acc = 0.0;
        for (std::size_t q = 0; q < k1; ++q) {
          if (bits[p * stride + t + q]) acc += taps[q];
        }
        slot[a] = acc;
      }
    };
    for (std::size_t f = 0; f < filters; ++f) mu[f].assign(a_count, 0.0);
    for (const std::uint32_t r : rows) {
      load_bits(r);
      for (std::size_t f = 0; f < filters; ++f) {
        for (std::size_t p = 0; p < patches; ++p) {
          for (std::size_t t = 0; t < k2; ++t) {
            conv_slot(model.blocks[f], p, t);
            kb.add(mu[f].data(), slot.data(), a_count);
          }
        }
      }
    }
    for (std::size_t f = 0; f < filters; ++f) {
      for (double& m : mu[f]) m *= inv_groups;
      vr[f].assign(a_count, 0.0);
    }
    for (const std::uint32_t r : rows) {
      load_bits(r);
      for (std::size_t f = 0; f < filters; ++f) {
        for (std::size_t p = 0; p < patches; ++p) {
          for (std::size_t t = 0; t < k2; ++t) {
            conv_slot(model.blocks[f], p, t);
            for (std::size_t a = 0; a < a_count; ++a) {
              const double d = slot[a] - mu[f][a];
              vr[f][a] += d * d;
            }
          }
        }
      }
    }
    for (std::size_t f = 0; f < filters; ++f) {
      for (double& v : vr[f]) v *= inv_groups;
      model.blocks[f].inner_bn.running_mean = mu[f];
      model.blocks[f].inner_bn.running_var = vr[f];
    }
  }

  // Slot statistics via per-filter truth tables on the refreshed block
  // parameters; the first patch column is the most significant index bit.
  const int n = spec.patch_width;
  const std::size_t table_rows = static_cast<std::size_t>(1) << n;
  std::vector<std::vector<std::uint8_t>> tables(filters);
  std::vector<std::uint8_t> patch(static_cast<std::size_t>(n));
  for (std::size_t f = 0; f < filters; ++f) {
    tables[f].resize(table_rows);
    for (std::size_t row = 0; row < table_rows; ++row) {
      for (int j = 0; j < n; ++j) {
        patch[static_cast<std::size_t>(j)] =
            static_cast<std::uint8_t>((row >> (n - 1 - j)) & 1);
      }
      tables[f][row] =
          static_cast<std::uint8_t>(block_forward(model.blocks[f], patch));
    }
  }
  const std::size_t slots = model.slots();
  std::vector<double> slot_mean(slots, 0.0);
  std::vector<double> slot_var(slots, 0.0);
  std::vector<std::size_t> patch_index(patches);
  auto index_patches = [&]() {
    for (std::size_t p = 0; p < patches; ++p) {
      std::size_t idx = 0;
      for (int j = 0; j < n; ++j) {
        idx = (idx << 1) | bits[p * stride + static_cast<std::size_t>(j)];
      }
      patch_index[p] = idx;
    }
  };
  for (const std::uint32_t r : rows) {
    load_bits(r);
    index_patches();
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t p = 0; p < patches; ++p) {
        slot_mean[f * patches + p] += tables[f][patch_index[p]];
      }
    }
  }
  for (double& m : slot_mean) m *= inv_n;
  for (const std::uint32_t r : rows) {
    load_bits(r);
    index_patches();
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t p = 0; p < patches; ++p) {
        const double d = static_cast<double>(tables[f][patch_index[p]]) -
                         slot_mean[f * patches + p];
        slot_var[f * patches + p] += d * d;
      }
    }
  }
  for (double& v : slot_var) v *= inv_n;
  model.final_bn.running_mean = std::move(slot_mean);
  model.final_bn.running_var = std::move(slot_var);
  model.bn_finalized = true;
}

}  // namespace ttr::nn
