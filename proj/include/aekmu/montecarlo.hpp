#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace aekmu::mc {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream_id, counter), so partitioning work across any number of
/// workers cannot change the sample set.
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t counter = 0;

    RandomStream() = default;
    RandomStream(std::uint64_t s, std::uint64_t id) : seed(s), stream_id(id) {}

    /// uniform in (0, 1], indexed draw (does not advance the counter)
    double uniform_at(std::uint64_t ctr) const;

    double next_uniform() { return uniform_at(counter++); }

    /// substream with an independent sequence for the same seed
    RandomStream split(std::uint64_t sub_id) const;
};

/// Two independent standard normals via Box-Muller on counter-indexed
/// uniforms (no rejection, exact determinism). Advances the counter by 2.
std::pair<double, double> normal_pair(RandomStream& stream);

/// Density histogram with binomial-per-bin standard errors.
struct Histogram {
    std::vector<double> edges;        // strictly increasing, size nbins+1
    std::vector<std::uint64_t> counts; // size nbins
    std::uint64_t total = 0;           // includes out-of-range samples
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;

    explicit Histogram(std::vector<double> bin_edges);
    void add(double x);
    void merge(const Histogram& other); // exact integer merge
    std::size_t size() const { return counts.size(); }
    double density(std::size_t bin) const;
    double stderror(std::size_t bin) const;
    double center(std::size_t bin) const { return 0.5 * (edges[bin] + edges[bin + 1]); }
    double width(std::size_t bin) const { return edges[bin + 1] - edges[bin]; }
};

Histogram estimate_pdf(const std::vector<double>& samples, std::vector<double> edges);

/// fraction of SNR samples below the threshold, with binomial standard error
std::pair<double, double> estimate_outage(const std::vector<double>& snr_samples,
                                          double gamma_th);

/// mean of Gamma_upper(p_m, q_m*gamma) / (2 Gamma(p_m)) with its standard error
std::pair<double, double> estimate_ber(const std::vector<double>& snr_samples, double p_m,
                                       double q_m);

/// two-sample Kolmogorov-Smirnov statistic (sorts copies)
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Deterministic parallel map over [0, count): fn(index, out_value). The
/// output vector is identical for any worker count.
void parallel_fill(std::vector<double>& out, std::uint64_t count,
                   const std::function<double(std::uint64_t)>& fn, int threads = 0);

} // namespace aekmu::mc
