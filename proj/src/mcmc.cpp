#include "pnarm/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace pnarm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Samples an index from unnormalized log weights. Returns nullopt when every
// weight is -inf.
std::optional<std::size_t> sample_log_weights(std::vector<double>& logw, Rng& rng) {
  const double top = *std::max_element(logw.begin(), logw.end());
  if (top == kNegInf) return std::nullopt;
  for (double& w : logw) w = std::exp(w - top);
  return rng.categorical(logw);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void McmcConfig::validate() const {
  if (iterations == 0) throw std::invalid_argument("iterations must be positive");
  if (burn_in >= iterations) throw std::invalid_argument("burn_in must be less than iterations");
  if (thinning == 0) throw std::invalid_argument("thinning must be at least 1");
  if (aux_components == 0) throw std::invalid_argument("aux_components must be positive");
  if (!(rw_step > 0.0) || !std::isfinite(rw_step)) {
    throw std::invalid_argument("rw_step must be positive");
  }
  if (chains == 0) throw std::invalid_argument("chains must be positive");
}

std::vector<int> sample_prior_labels(const PartitionPrior& prior, std::size_t nodes, Rng& rng) {
  std::vector<int> labels(nodes, 0);
  std::visit(Overloaded{
                 [&](const DdpPrior& p) {
                   std::size_t k = 0;
                   for (std::size_t n = 0; n < nodes; ++n) {
                     const auto probs = sequential_conditional(n, labels, k, p.weights, p.alpha);
                     const std::size_t c = rng.categorical(probs);
                     labels[n] = static_cast<int>(c);
                     if (c == k) ++k;
                   }
                 },
                 [&](const FmmPrior& p) {
                   std::vector<double> counts(p.components, p.gamma0);
                   for (std::size_t n = 0; n < nodes; ++n) {
                     const std::size_t c = rng.categorical(counts);
                     labels[n] = static_cast<int>(c);
                     counts[c] += 1.0;
                   }
                 }},
             prior);
  return labels;
}

Sampler::Sampler(const ModelData& data, TimeRange range, PartitionPrior partition_prior,
                 ThetaPrior theta_prior, McmcConfig config)
    : data_(&data),
      range_(range),
      partition_prior_(std::move(partition_prior)),
      theta_prior_(std::move(theta_prior)),
      config_(config) {
  config_.validate();
  data.check_range(range_);
  const std::size_t n = data.nodes();
  if (const auto* ddp = std::get_if<DdpPrior>(&partition_prior_)) {
    if (!(ddp->alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (ddp->weights.rows() != n || ddp->weights.cols() != n) {
      throw std::invalid_argument("DDP weight matrix does not match node count");
    }
  } else {
    const auto& fmm = std::get<FmmPrior>(partition_prior_);
    if (fmm.components == 0) throw std::invalid_argument("FMM needs at least one component");
    if (!(fmm.gamma0 > 0.0)) throw std::invalid_argument("gamma0 must be positive");
    fmm_lgamma_.resize(n + 1);
    for (std::size_t c = 0; c <= n; ++c) {
      fmm_lgamma_[c] = std::lgamma(static_cast<double>(c) + fmm.gamma0);
    }
  }
  if (const auto* d = std::get_if<DiscreteCoefficientPrior>(&theta_prior_)) {
    if (d->support.empty()) throw std::invalid_argument("discrete coefficient prior is empty");
  }
}

void Sampler::set_data(const ModelData& data) {
  if (data.nodes() != data_->nodes() || data.steps() != data_->steps()) {
    throw std::invalid_argument("replacement data must keep the same shape");
  }
  data_ = &data;
}

double Sampler::node_ll(std::size_t node, const ClusterParams& theta) const {
  return node_log_likelihood(node, theta, *data_, range_);
}

double Sampler::theta_log_prior(const ClusterParams& theta) const {
  return std::visit(Overloaded{[&](const CoefficientPrior& p) { return p.log_pdf(theta); },
                               [&](const DiscreteCoefficientPrior& p) {
                                 const bool in = std::find(p.support.begin(), p.support.end(),
                                                           theta) != p.support.end();
                                 return in ? -std::log(static_cast<double>(p.support.size()))
                                           : kNegInf;
                               }},
                    theta_prior_);
}

ClusterParams Sampler::draw_theta(Rng& rng) const {
  return std::visit(Overloaded{[&](const CoefficientPrior& p) { return p.sample(rng); },
                               [&](const DiscreteCoefficientPrior& p) {
                                 const std::vector<double> w(p.support.size(), 1.0);
                                 return p.support[rng.categorical(w)];
                               }},
                    theta_prior_);
}

double Sampler::partition_log_prior(const std::vector<int>& labels) const {
  if (const auto* ddp = std::get_if<DdpPrior>(&partition_prior_)) {
    return ddp_sequential_log_prior(labels, ddp->weights, ddp->alpha);
  }
  const auto& fmm = std::get<FmmPrior>(partition_prior_);
  std::vector<std::size_t> counts(fmm.components, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  // Terms constant in the labels are dropped.
  double lp = 0.0;
  for (std::size_t c : counts) lp += fmm_lgamma_[c];
  return lp;
}

void Sampler::refresh(ChainState& state) const {
  state.node_loglik.resize(data_->nodes());
  for (std::size_t i = 0; i < data_->nodes(); ++i) {
    state.node_loglik[i] = node_ll(i, state.thetas[static_cast<std::size_t>(state.labels[i])]);
  }
  state.log_post = cached_log_posterior(state);
}

double Sampler::cached_log_posterior(const ChainState& state) const {
  double lp = partition_log_prior(state.labels);
  for (const auto& theta : state.thetas) lp += theta_log_prior(theta);
  for (double ll : state.node_loglik) lp += ll;
  return lp;
}

double Sampler::log_posterior(const ChainState& state) const {
  double lp = partition_log_prior(state.labels);
  for (const auto& theta : state.thetas) lp += theta_log_prior(theta);
  for (std::size_t i = 0; i < state.labels.size(); ++i) {
    lp += node_ll(i, state.thetas[static_cast<std::size_t>(state.labels[i])]);
  }
  return lp;
}

ChainState Sampler::initial_state(Rng& rng) const {
  ChainState state;
  state.labels = sample_prior_labels(partition_prior_, data_->nodes(), rng);
  std::size_t clusters = 0;
  if (const auto* fmm = std::get_if<FmmPrior>(&partition_prior_)) {
    clusters = fmm->components;
  } else {
    clusters = static_cast<std::size_t>(*std::max_element(state.labels.begin(), state.labels.end())) + 1;
  }
  for (std::size_t k = 0; k < clusters; ++k) state.thetas.push_back(draw_theta(rng));
  refresh(state);
  return state;
}

std::vector<std::size_t> Sampler::sweep_order(Rng& rng) const {
  std::vector<std::size_t> order(data_->nodes());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (config_.random_scan) {
    // Fisher-Yates with our own uniform so the permutation is portable.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }
  }
  return order;
}

std::size_t Sampler::update_labels(ChainState& state, Rng& rng) const {
  if (const auto* ddp = std::get_if<DdpPrior>(&partition_prior_)) {
    return update_labels_ddp(state, rng, *ddp);
  }
  return update_labels_fmm(state, rng, std::get<FmmPrior>(partition_prior_));
}

std::size_t Sampler::update_labels_ddp(ChainState& state, Rng& rng, const DdpPrior& prior) const {
  const std::size_t m = config_.aux_components;
  const double log_m = std::log(static_cast<double>(m));
  std::size_t degenerate = 0;
  std::vector<int>& z = state.labels;
  std::vector<std::size_t> occupancy;
  std::vector<ClusterParams> aux(m);
  std::vector<double> logw;
  std::vector<double> ll;
  const auto order = sweep_order(rng);

  for (std::size_t i : order) {
    occupancy.assign(state.thetas.size(), 0);
    for (int l : z) ++occupancy[static_cast<std::size_t>(l)];
    const auto own = static_cast<std::size_t>(z[i]);

    // Remove node i. A singleton's cluster disappears and its coefficients
    // become the first auxiliary candidate.
    std::size_t first_fresh = 0;
    if (occupancy[own] == 1) {
      aux[0] = state.thetas[own];
      first_fresh = 1;
      state.thetas.erase(state.thetas.begin() + static_cast<long>(own));
      for (int& l : z) {
        if (l > static_cast<int>(own)) --l;
      }
    }
    for (std::size_t a = first_fresh; a < m; ++a) aux[a] = draw_theta(rng);
    const std::size_t k = state.thetas.size();

    logw.assign(k + m, 0.0);
    if (prior.scheme == DdpScheme::pairwise) {
      const auto probs = ddp_conditional(i, z, k, prior.weights, prior.alpha);
      for (std::size_t c = 0; c < k; ++c) logw[c] = std::log(probs[c]);
      for (std::size_t a = 0; a < m; ++a) logw[k + a] = std::log(probs[k]) - log_m;
    } else {
      for (std::size_t c = 0; c <= k; ++c) {
        z[i] = static_cast<int>(c);
        const double lp = ddp_sequential_log_prior(z, prior.weights, prior.alpha);
        if (c < k) {
          logw[c] = lp;
        } else {
          for (std::size_t a = 0; a < m; ++a) logw[k + a] = lp - log_m;
        }
      }
    }

    ll.assign(k + m, 0.0);
    bool any_finite = false;
    for (std::size_t c = 0; c < k + m; ++c) {
      ll[c] = node_ll(i, c < k ? state.thetas[c] : aux[c - k]);
      any_finite = any_finite || ll[c] != kNegInf;
    }
    if (any_finite) {
      for (std::size_t c = 0; c < k + m; ++c) logw[c] += ll[c];
    } else {
      ++degenerate;
    }

    const auto choice = sample_log_weights(logw, rng);
    if (!choice) throw std::logic_error("label update: prior gives zero mass everywhere");
    const std::size_t c = *choice;
    if (c < k) {
      z[i] = static_cast<int>(c);
    } else {
      z[i] = static_cast<int>(k);
      state.thetas.push_back(aux[c - k]);
    }
    state.node_loglik[i] = ll[c];
  }
  state.log_post = cached_log_posterior(state);
  return degenerate;
}

std::size_t Sampler::update_labels_fmm(ChainState& state, Rng& rng, const FmmPrior& prior) const {
  std::size_t degenerate = 0;
  const std::size_t comps = prior.components;
  std::vector<double> counts(comps, 0.0);
  for (int l : state.labels) counts[static_cast<std::size_t>(l)] += 1.0;
  std::vector<double> logw(comps);
  std::vector<double> ll(comps);
  const auto order = sweep_order(rng);

  for (std::size_t i : order) {
    counts[static_cast<std::size_t>(state.labels[i])] -= 1.0;
    bool any_finite = false;
    for (std::size_t c = 0; c < comps; ++c) {
      ll[c] = node_ll(i, state.thetas[c]);
      any_finite = any_finite || ll[c] != kNegInf;
    }
    for (std::size_t c = 0; c < comps; ++c) {
      logw[c] = std::log(counts[c] + prior.gamma0) + (any_finite ? ll[c] : 0.0);
    }
    if (!any_finite) ++degenerate;
    const std::size_t c = *sample_log_weights(logw, rng);
    state.labels[i] = static_cast<int>(c);
    counts[c] += 1.0;
    state.node_loglik[i] = ll[c];
  }
  state.log_post = cached_log_posterior(state);
  return degenerate;
}

void Sampler::update_coefficients(ChainState& state, Rng& rng, double rw_step,
                                  std::size_t& proposed, std::size_t& accepted) const {
  const std::size_t k = state.thetas.size();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < state.labels.size(); ++i) {
    members[static_cast<std::size_t>(state.labels[i])].push_back(i);
  }
  std::vector<double> proposal_ll;

  for (std::size_t c = 0; c < k; ++c) {
    ClusterParams& theta = state.thetas[c];
    const auto& nodes = members[c];
    if (nodes.empty()) {
      // Empty FMM component: its conditional is the prior.
      theta = draw_theta(rng);
      continue;
    }

    if (const auto* discrete = std::get_if<DiscreteCoefficientPrior>(&theta_prior_)) {
      const std::size_t s = discrete->support.size();
      std::vector<double> logw(s, 0.0);
      for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t i : nodes) logw[a] += node_ll(i, discrete->support[a]);
      }
      const auto pick = sample_log_weights(logw, rng);
      if (!pick) continue;
      theta = discrete->support[*pick];
      for (std::size_t i : nodes) state.node_loglik[i] = node_ll(i, theta);
      continue;
    }

    ClusterParams candidate{};
    double log_jacobian = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double eps = rw_step * rng.normal();
      candidate[j] = theta[j] * std::exp(eps);
      log_jacobian += eps;
    }
    ++proposed;
    // Draw the acceptance uniform before any early exit so the stream does
    // not depend on the outcome.
    const double log_u = std::log(rng.uniform_open());

    double current = 0.0;
    for (std::size_t i : nodes) current += state.node_loglik[i];
    proposal_ll.resize(nodes.size());
    double next = 0.0;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      proposal_ll[n] = node_ll(nodes[n], candidate);
      next += proposal_ll[n];
      if (next == kNegInf) break;
    }
    if (next == kNegInf) continue;
    const double log_ratio =
        next - current + theta_log_prior(candidate) - theta_log_prior(theta) + log_jacobian;
    if (log_u < log_ratio) {
      theta = candidate;
      for (std::size_t n = 0; n < nodes.size(); ++n) state.node_loglik[nodes[n]] = proposal_ll[n];
      ++accepted;
    }
  }
  state.log_post = cached_log_posterior(state);
}

PosteriorDraw Sampler::snapshot(const ChainState& state, std::size_t iteration) const {
  PosteriorDraw draw;
  draw.iteration = iteration;
  std::vector<int> mapping;
  const auto canon = canonical_labels(state.labels, &mapping);
  draw.partition = PartitionState::from_labels(canon);
  draw.thetas.resize(draw.partition.clusters());
  for (std::size_t old = 0; old < mapping.size(); ++old) {
    if (mapping[old] >= 0) draw.thetas[static_cast<std::size_t>(mapping[old])] = state.thetas[old];
  }
  draw.log_post = state.log_post;
  return draw;
}

PosteriorSamples Sampler::run(std::uint64_t seed, std::optional<ChainState> init) const {
  Rng rng(seed);
  ChainState state = init ? std::move(*init) : initial_state(rng);
  if (init) refresh(state);

  PosteriorSamples out;
  out.seed = seed;
  out.draws.reserve(config_.retained_draws());
  double log_step = std::log(config_.rw_step);

  for (std::size_t it = 0; it < config_.iterations; ++it) {
    out.degenerate_label_updates += update_labels(state, rng);
    const bool burning = it < config_.burn_in;
    if (config_.update_coefficients) {
      std::size_t proposed = 0;
      std::size_t accepted = 0;
      update_coefficients(state, rng, std::exp(log_step), proposed, accepted);
      if (burning) {
        out.acceptance.burn_in_proposed += proposed;
        out.acceptance.burn_in_accepted += accepted;
        if (config_.adapt && proposed > 0) {
          // Robbins-Monro step on log(rw_step) toward 0.25 acceptance.
          const double rate = static_cast<double>(accepted) / static_cast<double>(proposed);
          log_step += (rate - 0.25) / std::pow(static_cast<double>(it + 1), 0.6);
          log_step = std::clamp(log_step, std::log(1e-4), std::log(10.0));
        }
      } else {
        out.acceptance.proposed += proposed;
        out.acceptance.accepted += accepted;
      }
    }
    if (!burning && (it - config_.burn_in + 1) % config_.thinning == 0) {
      out.draws.push_back(snapshot(state, it + 1));
    }
  }
  out.final_rw_step = std::exp(log_step);
  return out;
}

PosteriorSamples run_chain(const ModelData& data, TimeRange range, const PartitionPrior& prior,
                           const ThetaPrior& theta_prior, const McmcConfig& config) {
  const Sampler sampler(data, range, prior, theta_prior, config);
  return sampler.run(config.seed);
}

std::vector<PosteriorSamples> run_multichain(const ModelData& data, TimeRange range,
                                             const PartitionPrior& prior,
                                             const ThetaPrior& theta_prior,
                                             const McmcConfig& config) {
  const Sampler sampler(data, range, prior, theta_prior, config);
  const std::size_t chains = config.chains;
  std::vector<PosteriorSamples> results(chains);
  auto run_one = [&](std::size_t c) {
    const std::uint64_t seed = chains == 1 ? config.seed : mix_seed(config.seed, c);
    results[c] = sampler.run(seed);
    results[c].chain = c;
  };

  std::size_t workers = config.threads;
  if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, chains);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chains; ++c) run_one(c);
    return results;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = w; c < chains; c += workers) run_one(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace pnarm
