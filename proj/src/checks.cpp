#include "oaae/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "oaae/eval.hpp"
#include "oaae/linalg.hpp"
#include "oaae/network.hpp"
#include "oaae/ole.hpp"
#include "oaae/rng.hpp"

namespace oaae {

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.normal(0.0, scale);
    return m;
}

// Random orthogonal matrix from two Householder reflections.
Matrix random_orthogonal(Rng& rng, std::size_t n) {
    Matrix q = Matrix::identity(n);
    for (int rep = 0; rep < 2; ++rep) {
        std::vector<double> v(n);
        double nrm = 0.0;
        for (double& x : v) {
            x = rng.normal();
            nrm += x * x;
        }
        nrm = std::sqrt(nrm);
        for (double& x : v) x /= nrm;
        Matrix h = Matrix::identity(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                h(i, j) -= 2.0 * v[i] * v[j];
        q = h * q;
    }
    return q;
}

double spectral_norm(const Matrix& m) {
    auto r = svd(m);
    return r.singular_values.empty() ? 0.0 : r.singular_values.front();
}

// True when every singular value of m exceeds the floor and neighbouring
// values are separated; keeps finite differences away from kinks.
bool spectrum_is_clean(const Matrix& m, double floor, double gap) {
    auto r = svd(m);
    for (std::size_t i = 0; i < r.singular_values.size(); ++i) {
        if (r.singular_values[i] < floor) return false;
        if (i + 1 < r.singular_values.size() &&
            r.singular_values[i] - r.singular_values[i + 1] < gap)
            return false;
    }
    return true;
}

LabeledLatentBatch random_clean_batch(Rng& rng, std::size_t d, std::size_t m, int classes) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        LabeledLatentBatch batch;
        batch.latents = random_matrix(rng, d, m);
        batch.labels.resize(m);
        for (std::size_t j = 0; j < m; ++j)
            batch.labels[j] = static_cast<int>(j) % classes;
        bool clean = spectrum_is_clean(batch.latents, 1e-3, 1e-3);
        for (const auto& [label, part] : partition_by_class(batch))
            clean = clean && spectrum_is_clean(part, 1e-3, 1e-3);
        if (clean) return batch;
    }
    throw NumericError("could not draw a batch with a clean spectrum");
}

double fd_max_error_vs(const Matrix& grad, const std::function<double(const Matrix&)>& f,
                       Matrix point, double h) {
    double worst = 0.0;
    for (std::size_t i = 0; i < point.rows(); ++i)
        for (std::size_t j = 0; j < point.cols(); ++j) {
            const double keep = point(i, j);
            point(i, j) = keep + h;
            const double up = f(point);
            point(i, j) = keep - h;
            const double dn = f(point);
            point(i, j) = keep;
            worst = std::max(worst, std::abs((up - dn) / (2.0 * h) - grad(i, j)));
        }
    return worst;
}

// Loss L = sum(y * r) over a micro-network output; linear in y, so dL/dy = r.
double network_fd_worst_rel(Network& net, const Tensor4& input, Rng& rng) {
    ForwardCache cache;
    Tensor4 y = net.forward(input, cache);
    Tensor4 r(y.n, y.c, y.h, y.w);
    for (double& v : r.data) v = rng.normal();

    GradBuffer grads = net.make_grad_buffer();
    net.backward(cache, r, grads);

    auto loss = [&]() {
        Tensor4 out = net.forward(input);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += out.data[i] * r.data[i];
        return acc;
    };

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t li = 0; li < net.num_layers(); ++li) {
        const NetLayer& layer = net.layer(li);
        if (layer.weights.empty()) continue;
        for (int part = 0; part < 2; ++part) {
            const std::vector<double>& ref = part == 0 ? layer.weights : layer.bias;
            const std::vector<double>& g = part == 0 ? grads.weights[li] : grads.bias[li];
            for (std::size_t i = 0; i < ref.size(); ++i) {
                std::vector<double> w = layer.weights, b = layer.bias;
                std::vector<double>& tgt = part == 0 ? w : b;
                const double keep = tgt[i];
                tgt[i] = keep + h;
                net.set_layer_params(li, w, b);
                const double up = loss();
                tgt[i] = keep - h;
                net.set_layer_params(li, w, b);
                const double dn = loss();
                tgt[i] = keep;
                net.set_layer_params(li, w, b);
                const double fd = (up - dn) / (2.0 * h);
                const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
                worst = std::max(worst, std::abs(fd - g[i]) / denom);
            }
        }
    }
    return worst;
}

Tensor4 random_tensor(Rng& rng, int n, int c, int h, int w) {
    Tensor4 t(n, c, h, w);
    for (double& v : t.data) v = rng.normal();
    return t;
}

} // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed, Fault fault) {
    std::vector<CheckResult> results;
    auto record = [&](const std::string& name, double margin, double tol) {
        results.push_back({name, margin, tol, margin <= tol});
    };

    // --- linalg -----------------------------------------------------------
    {
        Rng rng = Rng::substream(seed, "check-svd");
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            std::size_t rows = 1 + rng.uniform_index(16), cols = 1 + rng.uniform_index(16);
            Matrix a = random_matrix(rng, rows, cols);
            auto r = svd(a);
            Matrix rec(rows, cols);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < r.singular_values.size(); ++k)
                        acc += r.u(i, k) * r.singular_values[k] * r.v(j, k);
                    rec(i, j) = acc;
                }
            rec -= a;
            double fro = a.frobenius_norm();
            worst = std::max(worst, rec.frobenius_norm() / (fro > 0 ? fro : 1.0));
        }
        record("linalg.svd_reconstruction", worst, 1e-8);
    }
    {
        Rng rng = Rng::substream(seed, "check-unitary");
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t rows = 2 + rng.uniform_index(12), cols = 1 + rng.uniform_index(12);
            Matrix a = random_matrix(rng, rows, cols);
            Matrix q = random_orthogonal(rng, rows);
            worst = std::max(worst, std::abs(nuclear_norm(q * a) - nuclear_norm(a)));
        }
        record("linalg.unitary_invariance", worst, 1e-8);
    }
    {
        Rng rng = Rng::substream(seed, "check-subadd");
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t rows = 2 + rng.uniform_index(10);
            std::size_t ca = 1 + rng.uniform_index(6), cb = 1 + rng.uniform_index(6);
            Matrix a = random_matrix(rng, rows, ca);
            Matrix b = random_matrix(rng, rows, cb);
            Matrix ab(rows, ca + cb);
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < ca; ++j) ab(i, j) = a(i, j);
                for (std::size_t j = 0; j < cb; ++j) ab(i, ca + j) = b(i, j);
            }
            worst = std::max(worst, nuclear_norm(ab) - nuclear_norm(a) - nuclear_norm(b));
        }
        record("linalg.nuclear_subadditivity", worst, 1e-8);
    }
    {
        Rng rng = Rng::substream(seed, "check-specnorm");
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t rows = 1 + rng.uniform_index(16), cols = 1 + rng.uniform_index(16);
            Matrix a = random_matrix(rng, rows, cols);
            double delta = trial % 3 == 0 ? 0.5 : 1e-6;
            worst = std::max(worst, spectral_norm(nuclear_norm_subgradient(a, delta)) - 1.0);
        }
        record("linalg.subgradient_spectral_norm", worst, 1e-8);
    }
    {
        Rng rng = Rng::substream(seed, "check-subgrad-fd");
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            Matrix a = random_matrix(rng, 4, 3);
            while (!spectrum_is_clean(a, 1e-3, 1e-3)) a = random_matrix(rng, 4, 3);
            Matrix g = nuclear_norm_subgradient(a, 1e-6);
            worst = std::max(worst, fd_max_error_vs(
                                        g, [](const Matrix& m) { return nuclear_norm(m); }, a, 1e-6));
        }
        record("linalg.subgradient_fd", worst, 1e-4);
    }

    // --- ole ---------------------------------------------------------------
    {
        double worst = 0.0;
        { // zero batch, 3 classes, margin 1 -> loss exactly 3
            LabeledLatentBatch b{Matrix(4, 6), {0, 1, 2, 0, 1, 2}};
            worst = std::max(worst, std::abs(ole_loss(b, {1.0, 1e-3}) - 3.0));
        }
        { // orthogonal coordinate subspaces -> loss 0
            Matrix y(4, 4);
            y(0, 0) = 1;
            y(1, 1) = 1;
            y(2, 2) = 1;
            y(3, 3) = 1;
            LabeledLatentBatch b{y, {0, 0, 1, 1}};
            worst = std::max(worst, std::abs(ole_loss(b, {0.0, 1e-3})));
        }
        { // identical unit column in two classes -> 2 - sqrt(2)
            Matrix y(3, 2);
            y(0, 0) = 1;
            y(0, 1) = 1;
            LabeledLatentBatch b{y, {0, 1}};
            worst = std::max(worst,
                             std::abs(ole_loss(b, {0.0, 1e-3}) - (2.0 - std::sqrt(2.0))));
        }
        record("ole.fixtures", worst, 1e-8);
    }
    {
        Rng rng = Rng::substream(seed, "check-ole-fd");
        OleConfig cfg{0.0, 1e-6};
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            LabeledLatentBatch batch = random_clean_batch(rng, 6, 8, trial % 2 == 0 ? 2 : 3);
            Matrix g = ole_grad(batch, cfg);
            if (fault == Fault::ole_grad_sign) g *= -1.0;
            auto loss_at = [&](const Matrix& y) {
                return ole_loss({y, batch.labels}, cfg);
            };
            worst = std::max(worst, fd_max_error_vs(g, loss_at, batch.latents, 1e-6));
        }
        record("ole.grad_fd", worst, 1e-4);
    }

    // --- nn ----------------------------------------------------------------
    {
        Rng rng = Rng::substream(seed, "check-nn-dense");
        Network net("micro_dense", Shape3{5, 1, 1},
                    {LayerSpec::dense(4), LayerSpec::leaky_relu(), LayerSpec::dense(3)});
        net.init_params(rng);
        Tensor4 x = random_tensor(rng, 3, 5, 1, 1);
        record("nn.dense_fd", network_fd_worst_rel(net, x, rng), 1e-3);
    }
    {
        Rng rng = Rng::substream(seed, "check-nn-conv");
        Network net("micro_conv", Shape3{2, 6, 6},
                    {LayerSpec::conv2d(3, 3, 2, 1), LayerSpec::leaky_relu(),
                     LayerSpec::flatten(), LayerSpec::dense(2)});
        net.init_params(rng);
        Tensor4 x = random_tensor(rng, 2, 2, 6, 6);
        record("nn.conv_fd", network_fd_worst_rel(net, x, rng), 1e-3);
    }
    {
        Rng rng = Rng::substream(seed, "check-nn-tconv");
        Network net("micro_tconv", Shape3{3, 3, 3},
                    {LayerSpec::tconv2d(2, 3, 2, 1, 1), LayerSpec::sigmoid()});
        net.init_params(rng);
        Tensor4 x = random_tensor(rng, 2, 3, 3, 3);
        record("nn.tconv_fd", network_fd_worst_rel(net, x, rng), 1e-3);
    }
    {
        Rng rng = Rng::substream(seed, "check-nn-act");
        Network net("micro_act", Shape3{4, 2, 2},
                    {LayerSpec::leaky_relu(0.2), LayerSpec::flatten(), LayerSpec::dense(3),
                     LayerSpec::sigmoid(), LayerSpec::dense(2)});
        net.init_params(rng);
        Tensor4 x = random_tensor(rng, 2, 4, 2, 2);
        record("nn.activation_fd", network_fd_worst_rel(net, x, rng), 1e-3);
    }

    // --- eval ---------------------------------------------------------------
    {
        Rng rng = Rng::substream(seed, "check-auroc");
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng.uniform_index(120);
            std::vector<double> scores(n);
            std::vector<char> novel(n);
            bool tie_heavy = trial % 2 == 0;
            for (std::size_t i = 0; i < n; ++i) {
                scores[i] = tie_heavy ? static_cast<double>(rng.uniform_index(5)) : rng.normal();
                novel[i] = rng.uniform() < 0.4 ? 1 : 0;
            }
            std::size_t pos = 0;
            for (char f : novel) pos += f;
            if (pos == 0 || pos == n) {
                novel[0] = 1;
                novel[n - 1] = 0;
            }

            // O(n^2) pairwise oracle, ties counted half.
            double wins = 0.0;
            std::size_t n_pos = 0, n_neg = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!novel[i]) continue;
                ++n_pos;
                for (std::size_t j = 0; j < n; ++j) {
                    if (novel[j]) continue;
                    if (scores[i] > scores[j]) wins += 1.0;
                    else if (scores[i] == scores[j]) wins += 0.5;
                }
            }
            n_neg = n - n_pos;
            double brute = wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
            worst = std::max(worst, std::abs(auroc(scores, novel) - brute));
        }
        record("eval.auroc_oracle", worst, 0.0);
    }

    return results;
}

} // namespace oaae
