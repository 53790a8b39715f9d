#include "fsb/control_net.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fsb/errors.hpp"
#include "fsb/kernels.hpp"
#include "fsb/rng.hpp"
#include "fsb/serialize.hpp"

#include <nlohmann/json.hpp>

namespace fsb {

namespace {

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }
inline double gelu_grad(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)) +
           x * std::exp(-0.5 * x * x) * inv_sqrt_2pi;
}

// geometric frequency ladder covering horizons around T ~ 1
void time_embedding(double t, int E, double* e) {
    const int half = E / 2;
    for (int j = 0; j < half; ++j) {
        const double w = 0.25 * std::pow(1024.0, half > 1 ? double(j) / (half - 1) : 0.0);
        e[j] = std::sin(w * t);
        e[half + j] = std::cos(w * t);
    }
}

// flat-parameter offsets
struct Layout {
    int in_dim, w, E, Ks, L;
    int w_lift, b_lift, w_t1, b_t1;
    struct Block {
        int gains, w_loc, b_loc, w_mod, b_mod, w1, b1, w2, b2;
    };
    std::vector<Block> blocks;
    int w_out, b_out, total;

    explicit Layout(const ControlNetArch& a) {
        in_dim = 1 + 2 * a.fourier_features_m;
        w = a.width;
        E = a.time_embed_dim;
        Ks = a.spectral_modes_total();
        L = a.n_layers;
        int off = 0;
        auto take = [&off](int n) { int o = off; off += n; return o; };
        w_lift = take(w * in_dim);
        b_lift = take(w);
        w_t1 = take(E * E);
        b_t1 = take(E);
        blocks.resize(L);
        for (auto& b : blocks) {
            b.gains = take(Ks * w);
            b.w_loc = take(w * w);
            b.b_loc = take(w);
            b.w_mod = take(2 * w * E);
            b.b_mod = take(2 * w);
            b.w1 = take(w * w);
            b.b1 = take(w);
            b.w2 = take(w * w);
            b.b2 = take(w);
        }
        w_out = take(w);
        b_out = take(1);
        total = off;
    }
};

std::string grid_cache_key(const GridSpec& g) {
    std::ostringstream os;
    os << g.dims << ':' << g.res[0] << 'x' << g.res[1];
    for (int d = 0; d < g.dims; ++d)
        os << ':' << format_double(g.bounds[d][0]) << ',' << format_double(g.bounds[d][1]);
    return os.str();
}

void add_bias_rows(MatrixRM& M, const double* b) {
    const auto& k = kern::active();
    for (long i = 0; i < M.rows(); ++i) k.acc(M.data() + i * M.cols(), b, static_cast<int>(M.cols()));
}

void colsum(const MatrixRM& M, double* out) {
    const auto& k = kern::active();
    for (long i = 0; i < M.rows(); ++i) k.acc(out, M.data() + i * M.cols(), static_cast<int>(M.cols()));
}

}  // namespace

void ControlNetArch::check() const {
    if (dims != 1 && dims != 2) throw ConfigError("ControlNetArch: dims must be 1 or 2");
    if (n_layers < 1 || width < 1 || n_spectral_modes < 1 || fourier_features_m < 1)
        throw ConfigError("ControlNetArch: layer/width/mode counts must be positive");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
        throw ConfigError("ControlNetArch: time_embed_dim must be even and >= 2");
}

struct ControlNet::GridFeatures {
    MatrixRM G;     // N x 2m Fourier features of the normalized coordinates
    MatrixRM phi;   // Ks x N cosine modes
    MatrixRM phiT;  // N x Ks
    double h = 0.0;
};

ControlNet::ControlNet(ControlNetArch arch, uint64_t seed) : arch_(arch), seed_(seed) {
    arch_.check();
    const Layout lay(arch_);
    theta_ = Eigen::VectorXd::Zero(lay.total);

    RngStream rw(seed, 0);
    auto fill_gaussian = [&](int off, int n, double std) {
        for (int i = 0; i < n; ++i) theta_[off + i] = std * rw.normal();
    };
    fill_gaussian(lay.w_lift, lay.w * lay.in_dim, 1.0 / std::sqrt(lay.in_dim));
    fill_gaussian(lay.w_t1, lay.E * lay.E, 1.0 / std::sqrt(lay.E));
    for (const auto& b : lay.blocks) {
        for (int i = 0; i < lay.Ks * lay.w; ++i) theta_[b.gains + i] = 1.0;
        fill_gaussian(b.w_loc, lay.w * lay.w, 1.0 / std::sqrt(lay.w));
        fill_gaussian(b.w1, lay.w * lay.w, 1.0 / std::sqrt(lay.w));
        fill_gaussian(b.w2, lay.w * lay.w, 1.0 / std::sqrt(lay.w));
        // w_mod stays zero: no modulation until trained
    }
    // zero head: untrained control is identically zero

    RngStream rb(seed, 1);
    ff_B_.resize(arch_.fourier_features_m, arch_.dims);
    for (int i = 0; i < ff_B_.rows(); ++i)
        for (int j = 0; j < ff_B_.cols(); ++j) ff_B_(i, j) = arch_.ff_scale * rb.normal();
}

const ControlNet::GridFeatures& ControlNet::features_for(const GridSpec& g) const {
    if (g.dims != arch_.dims) throw ConfigError("ControlNet: grid dimensionality not supported by arch");
    const std::string key = grid_cache_key(g);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = feature_cache_.find(key);
    if (it != feature_cache_.end()) return *it->second;

    auto feat = std::make_unique<GridFeatures>();
    const int N = g.num_points(), m = arch_.fourier_features_m;
    feat->G.resize(N, 2 * m);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < N; ++i) {
        const auto p = g.point(i);
        for (int r = 0; r < m; ++r) {
            double phase = 0.0;
            for (int d = 0; d < g.dims; ++d)
                phase += ff_B_(r, d) * (p[d] - g.bounds[d][0]) / g.extent(d);
            feat->G(i, r) = std::cos(two_pi * phase);
            feat->G(i, m + r) = std::sin(two_pi * phase);
        }
    }
    feat->phi = cosine_mode_matrix(g, arch_.n_spectral_modes);
    feat->phiT = feat->phi.transpose();
    feat->h = g.cell_volume();
    const GridFeatures& ref = *feat;
    feature_cache_.emplace(key, std::move(feat));
    return ref;
}

struct ControlNet::Trace {
    const GridFeatures* feat = nullptr;
    GridSpec grid;
    MatrixRM X_in;
    Eigen::VectorXd e, u_pre, u;
    std::vector<MatrixRM> H;  // L+1 activations
    struct BlockTrace {
        MatrixRM C, U, V, Z, A;
        Eigen::VectorXd s1, sh;
    };
    std::vector<BlockTrace> blocks;
};

std::shared_ptr<ControlNet::Trace> ControlNet::forward_trace(double t, const GridField& x,
                                                             GridField* out) const {
    x.check();
    const Layout lay(arch_);
    const GridFeatures& feat = features_for(x.grid);
    const int N = x.grid.num_points();
    const auto& k = kern::active();
    const double* th = theta_.data();

    auto trace = std::make_shared<Trace>();
    trace->feat = &feat;
    trace->grid = x.grid;

    // per-point inputs [x(p), fourier features]
    trace->X_in.resize(N, lay.in_dim);
    for (int i = 0; i < N; ++i) {
        trace->X_in(i, 0) = x.values[i];
        std::copy_n(feat.G.data() + static_cast<long>(i) * 2 * arch_.fourier_features_m,
                    2 * arch_.fourier_features_m, trace->X_in.data() + static_cast<long>(i) * lay.in_dim + 1);
    }

    // time trunk
    trace->e.resize(lay.E);
    time_embedding(t, lay.E, trace->e.data());
    trace->u_pre.resize(lay.E);
    for (int i = 0; i < lay.E; ++i)
        trace->u_pre[i] = k.dot(th + lay.w_t1 + static_cast<long>(i) * lay.E, trace->e.data(), lay.E) +
                          th[lay.b_t1 + i];
    trace->u.resize(lay.E);
    for (int i = 0; i < lay.E; ++i) trace->u[i] = gelu(trace->u_pre[i]);

    // lift
    trace->H.resize(lay.L + 1);
    trace->H[0] = MatrixRM::Zero(N, lay.w);
    k.matmul_nt(trace->H[0].data(), trace->X_in.data(), th + lay.w_lift, N, lay.in_dim, lay.w);
    add_bias_rows(trace->H[0], th + lay.b_lift);

    trace->blocks.resize(lay.L);
    for (int l = 0; l < lay.L; ++l) {
        const auto& blk = lay.blocks[l];
        auto& bt = trace->blocks[l];
        const MatrixRM& H = trace->H[l];

        // spectral path: project, gain per (mode, channel), synthesize
        bt.C = MatrixRM::Zero(lay.Ks, lay.w);
        k.matmul_nn(bt.C.data(), feat.phi.data(), H.data(), lay.Ks, N, lay.w);
        k.scale(feat.h, bt.C.data(), lay.Ks * lay.w);
        MatrixRM C2(lay.Ks, lay.w);
        k.mul(C2.data(), bt.C.data(), th + blk.gains, lay.Ks * lay.w);
        bt.U = MatrixRM::Zero(N, lay.w);
        k.matmul_nn(bt.U.data(), feat.phiT.data(), C2.data(), N, lay.Ks, lay.w);

        // local path
        k.matmul_nt(bt.U.data(), H.data(), th + blk.w_loc, N, lay.w, lay.w);
        add_bias_rows(bt.U, th + blk.b_loc);

        // time modulation (scale/shift)
        bt.s1.resize(lay.w);
        bt.sh.resize(lay.w);
        for (int j = 0; j < lay.w; ++j) {
            bt.s1[j] = 1.0 + k.dot(th + blk.w_mod + static_cast<long>(j) * lay.E, trace->u.data(), lay.E) +
                       th[blk.b_mod + j];
            bt.sh[j] = k.dot(th + blk.w_mod + static_cast<long>(lay.w + j) * lay.E, trace->u.data(), lay.E) +
                       th[blk.b_mod + lay.w + j];
        }
        bt.V.resize(N, lay.w);
        for (int i = 0; i < N; ++i)
            k.muladd(bt.V.data() + static_cast<long>(i) * lay.w, bt.U.data() + static_cast<long>(i) * lay.w,
                     bt.s1.data(), bt.sh.data(), lay.w);

        // residual pointwise MLP
        bt.Z = MatrixRM::Zero(N, lay.w);
        k.matmul_nt(bt.Z.data(), bt.V.data(), th + blk.w1, N, lay.w, lay.w);
        add_bias_rows(bt.Z, th + blk.b1);
        bt.A.resize(N, lay.w);
        for (long i = 0; i < static_cast<long>(N) * lay.w; ++i) bt.A.data()[i] = gelu(bt.Z.data()[i]);
        trace->H[l + 1] = bt.V;
        k.matmul_nt(trace->H[l + 1].data(), bt.A.data(), th + blk.w2, N, lay.w, lay.w);
        add_bias_rows(trace->H[l + 1], th + blk.b2);
    }

    if (out) {
        out->grid = x.grid;
        out->channels = 1;
        out->values.resize(N);
        const MatrixRM& HL = trace->H[lay.L];
        for (int i = 0; i < N; ++i)
            out->values[i] =
                k.dot(HL.data() + static_cast<long>(i) * lay.w, th + lay.w_out, lay.w) + th[lay.b_out];
    }
    return trace;
}

void ControlNet::backward(const Trace& trace, const GridField& cotangent,
                          Eigen::VectorXd& grad_theta, GridField* grad_x) const {
    const Layout lay(arch_);
    if (grad_theta.size() != lay.total) throw ConfigError("ControlNet::backward: grad size mismatch");
    if (!(cotangent.grid == trace.grid)) throw ConfigError("ControlNet::backward: cotangent grid mismatch");
    const GridFeatures& feat = *trace.feat;
    const int N = trace.grid.num_points();
    const auto& k = kern::active();
    const double* th = theta_.data();
    double* gth = grad_theta.data();
    const double* dy = cotangent.values.data();

    // head
    const MatrixRM& HL = trace.H[lay.L];
    for (int i = 0; i < N; ++i) {
        k.axpy(dy[i], HL.data() + static_cast<long>(i) * lay.w, gth + lay.w_out, lay.w);
        gth[lay.b_out] += dy[i];
    }
    MatrixRM dH = MatrixRM::Zero(N, lay.w);
    for (int i = 0; i < N; ++i)
        k.axpy(dy[i], th + lay.w_out, dH.data() + static_cast<long>(i) * lay.w, lay.w);

    Eigen::VectorXd du = Eigen::VectorXd::Zero(lay.E);
    MatrixRM dA(N, lay.w), dZ(N, lay.w), dV(N, lay.w), dU(N, lay.w), dHprev(N, lay.w);
    MatrixRM dC2(lay.Ks, lay.w), dC(lay.Ks, lay.w);

    for (int l = lay.L - 1; l >= 0; --l) {
        const auto& blk = lay.blocks[l];
        const auto& bt = trace.blocks[l];
        const MatrixRM& H = trace.H[l];

        // H' = V + gelu(Z) W2^T + b2
        k.matmul_tn(gth + blk.w2, dH.data(), bt.A.data(), N, lay.w, lay.w);
        colsum(dH, gth + blk.b2);
        dA.setZero();
        k.matmul_nn(dA.data(), dH.data(), th + blk.w2, N, lay.w, lay.w);
        for (long i = 0; i < static_cast<long>(N) * lay.w; ++i)
            dZ.data()[i] = dA.data()[i] * gelu_grad(bt.Z.data()[i]);
        dV = dH;
        k.matmul_nn(dV.data(), dZ.data(), th + blk.w1, N, lay.w, lay.w);
        k.matmul_tn(gth + blk.w1, dZ.data(), bt.V.data(), N, lay.w, lay.w);
        colsum(dZ, gth + blk.b1);

        // V = U .* s1 + sh
        Eigen::VectorXd dmod = Eigen::VectorXd::Zero(2 * lay.w);
        for (int i = 0; i < N; ++i) {
            const double* dvi = dV.data() + static_cast<long>(i) * lay.w;
            k.mul(dU.data() + static_cast<long>(i) * lay.w, dvi, bt.s1.data(), lay.w);
            k.mulacc(dmod.data(), dvi, bt.U.data() + static_cast<long>(i) * lay.w, lay.w);
            k.acc(dmod.data() + lay.w, dvi, lay.w);
        }
        for (int r = 0; r < 2 * lay.w; ++r) {
            k.axpy(dmod[r], trace.u.data(), gth + blk.w_mod + static_cast<long>(r) * lay.E, lay.E);
            gth[blk.b_mod + r] += dmod[r];
            k.axpy(dmod[r], th + blk.w_mod + static_cast<long>(r) * lay.E, du.data(), lay.E);
        }

        // U = phiT (g .* (h phi H)) + H W_loc^T + b_loc
        k.matmul_tn(gth + blk.w_loc, dU.data(), H.data(), N, lay.w, lay.w);
        colsum(dU, gth + blk.b_loc);
        dHprev.setZero();
        k.matmul_nn(dHprev.data(), dU.data(), th + blk.w_loc, N, lay.w, lay.w);

        dC2.setZero();
        k.matmul_nn(dC2.data(), feat.phi.data(), dU.data(), lay.Ks, N, lay.w);
        k.mulacc(gth + blk.gains, dC2.data(), bt.C.data(), lay.Ks * lay.w);
        k.mul(dC.data(), dC2.data(), th + blk.gains, lay.Ks * lay.w);
        k.scale(feat.h, dC.data(), lay.Ks * lay.w);
        k.matmul_nn(dHprev.data(), feat.phiT.data(), dC.data(), N, lay.Ks, lay.w);

        dH = dHprev;
    }

    // lift
    k.matmul_tn(gth + lay.w_lift, dH.data(), trace.X_in.data(), N, lay.w, lay.in_dim);
    colsum(dH, gth + lay.b_lift);
    if (grad_x) {
        MatrixRM dX = MatrixRM::Zero(N, lay.in_dim);
        k.matmul_nn(dX.data(), dH.data(), th + lay.w_lift, N, lay.w, lay.in_dim);
        grad_x->grid = trace.grid;
        grad_x->channels = 1;
        grad_x->values.resize(N);
        for (int i = 0; i < N; ++i) grad_x->values[i] = dX(i, 0);
    }

    // time trunk
    for (int i = 0; i < lay.E; ++i) {
        const double dup = du[i] * gelu_grad(trace.u_pre[i]);
        k.axpy(dup, trace.e.data(), gth + lay.w_t1 + static_cast<long>(i) * lay.E, lay.E);
        gth[lay.b_t1 + i] += dup;
    }
}

GridField ControlNet::forward(double t, const GridField& x) const {
    GridField out;
    forward_trace(t, x, &out);
    return out;
}

void ControlNet::vjp(double t, const GridField& x, const GridField& cotangent,
                     Eigen::VectorXd& grad_theta, GridField* grad_x) const {
    GridField out;
    auto trace = forward_trace(t, x, &out);
    backward(*trace, cotangent, grad_theta, grad_x);
}

nlohmann::ordered_json ControlNet::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["arch"] = {{"dims", arch_.dims},
                 {"n_layers", arch_.n_layers},
                 {"width", arch_.width},
                 {"n_spectral_modes", arch_.n_spectral_modes},
                 {"fourier_features_m", arch_.fourier_features_m},
                 {"time_embed_dim", arch_.time_embed_dim},
                 {"ff_scale", arch_.ff_scale}};
    j["theta"] = base64_encode(theta_.data(), theta_.size());
    j["seed"] = seed_;
    j["train_step"] = train_step;
    return j;
}

std::unique_ptr<ControlNet> ControlNet::from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1) throw ConfigError("ControlNet: unsupported checkpoint version");
    const auto& ja = j.at("arch");
    ControlNetArch arch;
    arch.dims = ja.at("dims").get<int>();
    arch.n_layers = ja.at("n_layers").get<int>();
    arch.width = ja.at("width").get<int>();
    arch.n_spectral_modes = ja.at("n_spectral_modes").get<int>();
    arch.fourier_features_m = ja.at("fourier_features_m").get<int>();
    arch.time_embed_dim = ja.at("time_embed_dim").get<int>();
    arch.ff_scale = ja.at("ff_scale").get<double>();
    auto net = std::make_unique<ControlNet>(arch, j.at("seed").get<uint64_t>());
    const auto theta = base64_decode_f64(j.at("theta").get<std::string>());
    if (theta.size() != static_cast<size_t>(net->theta_.size()))
        throw ConfigError("ControlNet: checkpoint parameter count mismatch");
    net->theta_ = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
    net->train_step = j.value("train_step", int64_t{0});
    return net;
}

}  // namespace fsb
