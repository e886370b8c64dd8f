#include "cae/encoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cae::model {

using Eigen::Index;
using Eigen::VectorXd;
using features::Segment;

namespace {

Index ix(std::size_t v) { return static_cast<Index>(v); }

Mat gaussian(Index rows, Index cols, double stddev, Rng& rng) {
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = stddev * rng.normal();
    return m;
}

LayerWeights init_layer(const ModelConfig& cfg, Rng& rng) {
    const Index h = ix(cfg.hidden_dim);
    const Index f = ix(cfg.hidden_dim * cfg.mlp_ratio);
    const double s = cfg.init_std;
    LayerWeights l;
    l.ln1_g = Mat::Ones(1, h);
    l.ln1_b = Mat::Zero(1, h);
    l.wq = gaussian(h, h, s, rng);
    l.bq = Mat::Zero(1, h);
    l.wk = gaussian(h, h, s, rng);
    l.bk = Mat::Zero(1, h);
    l.wv = gaussian(h, h, s, rng);
    l.bv = Mat::Zero(1, h);
    l.wo = gaussian(h, h, s, rng);
    l.bo = Mat::Zero(1, h);
    l.ln2_g = Mat::Ones(1, h);
    l.ln2_b = Mat::Zero(1, h);
    l.w1 = gaussian(h, f, s, rng);
    l.b1 = Mat::Zero(1, f);
    l.w2 = gaussian(f, h, s, rng);
    l.b2 = Mat::Zero(1, h);
    return l;
}

// ---------------------------------------------------------------------------------------------
// Layer norm

struct LnCache {
    Mat xhat;
    VectorXd rstd;
};

Mat ln_forward(const Mat& x, const Mat& g, const Mat& b, double eps, LnCache* cache) {
    const VectorXd mu = x.rowwise().mean();
    const Mat xc = x.colwise() - mu;
    const VectorXd var = xc.array().square().rowwise().mean();
    const VectorXd rstd = (var.array() + eps).rsqrt();
    Mat xhat = xc.array().colwise() * rstd.array();
    Mat y = (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->rstd = rstd;
    }
    return y;
}

Mat ln_backward(const Mat& dy, const LnCache& c, const Mat& g, Mat* dg, Mat* db) {
    if (dg) *dg += (dy.array() * c.xhat.array()).colwise().sum().matrix();
    if (db) *db += dy.colwise().sum();
    const Mat dxhat = dy.array().rowwise() * g.row(0).array();
    const VectorXd m1 = dxhat.rowwise().mean();
    const VectorXd m2 = (dxhat.array() * c.xhat.array()).rowwise().mean();
    Mat dx = (dxhat.colwise() - m1) - Mat(c.xhat.array().colwise() * m2.array());
    return dx.array().colwise() * c.rstd.array();
}

// ---------------------------------------------------------------------------------------------
// GELU (erf form)

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

// ---------------------------------------------------------------------------------------------
// Transformer layer

struct LayerCache {
    LnCache ln1, ln2;
    Mat a, q, k, v, o, m, hpre, hact;
    std::vector<Mat> p;
};

Mat add_bias(const Mat& x, const Mat& b) { return x.rowwise() + b.row(0); }

Mat layer_forward(const LayerWeights& w, const Mat& x, const AttentionMask& mask, std::size_t heads, double eps,
                  LayerCache* cache) {
    const Index n = x.rows();
    const Index h = x.cols();
    const Index dh = h / ix(heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    LayerCache local;
    LayerCache& c = cache ? *cache : local;
    c.a = ln_forward(x, w.ln1_g, w.ln1_b, eps, &c.ln1);
    c.q = add_bias(c.a * w.wq, w.bq);
    c.k = add_bias(c.a * w.wk, w.bk);
    c.v = add_bias(c.a * w.wv, w.bv);
    c.o.resize(n, h);
    c.p.assign(heads, Mat());
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const Index off = ix(hd) * dh;
        const Mat s = (c.q.middleCols(off, dh) * c.k.middleCols(off, dh).transpose()) * scale;
        Mat p = Mat::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (Index j = 0; j < n; ++j)
                if (mask(i, j)) mx = std::max(mx, s(i, j));
            double sum = 0.0;
            for (Index j = 0; j < n; ++j) {
                if (!mask(i, j)) continue;
                p(i, j) = std::exp(s(i, j) - mx);
                sum += p(i, j);
            }
            for (Index j = 0; j < n; ++j)
                if (mask(i, j)) p(i, j) /= sum;
        }
        c.o.middleCols(off, dh) = p * c.v.middleCols(off, dh);
        c.p[hd] = std::move(p);
    }
    const Mat x1 = x + add_bias(c.o * w.wo, w.bo);
    c.m = ln_forward(x1, w.ln2_g, w.ln2_b, eps, &c.ln2);
    c.hpre = add_bias(c.m * w.w1, w.b1);
    c.hact = c.hpre.unaryExpr([](double t) { return gelu(t); });
    return x1 + add_bias(c.hact * w.w2, w.b2);
}

Mat layer_backward(const LayerWeights& w, const LayerCache& c, const Mat& dy, const AttentionMask& mask,
                   std::size_t heads, LayerWeights& g) {
    const Index n = dy.rows();
    const Index h = dy.cols();
    const Index dh = h / ix(heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    g.w2 += c.hact.transpose() * dy;
    g.b2 += dy.colwise().sum();
    const Mat dhact = dy * w.w2.transpose();
    const Mat dhpre = dhact.array() * c.hpre.unaryExpr([](double t) { return gelu_grad(t); }).array();
    g.w1 += c.m.transpose() * dhpre;
    g.b1 += dhpre.colwise().sum();
    const Mat dm = dhpre * w.w1.transpose();
    const Mat dx1 = dy + ln_backward(dm, c.ln2, w.ln2_g, &g.ln2_g, &g.ln2_b);

    g.wo += c.o.transpose() * dx1;
    g.bo += dx1.colwise().sum();
    const Mat d_o = dx1 * w.wo.transpose();
    Mat dq = Mat::Zero(n, h), dk = Mat::Zero(n, h), dv = Mat::Zero(n, h);
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const Index off = ix(hd) * dh;
        const Mat& p = c.p[hd];
        const Mat doh = d_o.middleCols(off, dh);
        const Mat dp = doh * c.v.middleCols(off, dh).transpose();
        dv.middleCols(off, dh) = p.transpose() * doh;
        const VectorXd rs = (dp.array() * p.array()).rowwise().sum();
        Mat ds = Mat::Zero(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (mask(i, j)) ds(i, j) = p(i, j) * (dp(i, j) - rs(i));
        ds *= scale;
        dq.middleCols(off, dh) = ds * c.k.middleCols(off, dh);
        dk.middleCols(off, dh) = ds.transpose() * c.q.middleCols(off, dh);
    }
    g.wq += c.a.transpose() * dq;
    g.bq += dq.colwise().sum();
    g.wk += c.a.transpose() * dk;
    g.bk += dk.colwise().sum();
    g.wv += c.a.transpose() * dv;
    g.bv += dv.colwise().sum();
    const Mat da = dq * w.wq.transpose() + dk * w.wk.transpose() + dv * w.wv.transpose();
    return dx1 + ln_backward(da, c.ln1, w.ln1_g, &g.ln1_g, &g.ln1_b);
}

void require_finite(const Mat& m, const char* where) {
    if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + where);
}

// ---------------------------------------------------------------------------------------------
// Whole model

struct Forward {
    LnCache text_ln, video_ln;
    Mat text_in, video_in;
    AttentionMask mask;
    std::vector<LayerCache> cross;
    std::vector<LayerCache> temporal;
    LnCache temporal_ln;
    Mat hidden;  // cross stack output, [text; video]
    EncoderOutput out;
};

void check_example(const ModelState& s, const Example& ex) {
    const auto& cfg = s.config;
    if (ex.token_ids.empty()) throw std::invalid_argument("empty token sequence");
    if (ex.token_ids.size() > cfg.max_text_len) throw std::invalid_argument("token sequence exceeds max_text_len");
    if (static_cast<std::size_t>(ex.frames.rows()) > cfg.max_video_len)
        throw std::invalid_argument("frame sequence exceeds max_video_len");
    if (ex.frames.rows() > 0 && static_cast<std::size_t>(ex.frames.cols()) != cfg.feature_dim)
        throw std::invalid_argument("frame feature dimension mismatch");
    if (ex.segments.size() != static_cast<std::size_t>(ex.frames.rows()))
        throw std::invalid_argument("segment labels do not match frames");
    for (auto id : ex.token_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size)
            throw std::invalid_argument("token id outside the vocabulary");
}

void embed_forward(const ModelState& s, const Example& ex, Forward& f) {
    check_example(s, ex);
    const auto& w = s.weights;
    const Index n_text = ix(ex.token_ids.size());
    const Index n_video = ex.frames.rows();
    const Index h = ix(s.config.hidden_dim);
    f.text_in.resize(n_text, h);
    for (Index i = 0; i < n_text; ++i)
        f.text_in.row(i) = w.tok_emb.row(ex.token_ids[static_cast<std::size_t>(i)]) + w.text_pos.row(i) +
                           w.text_seg.row(0);
    const Mat text = ln_forward(f.text_in, w.text_ln_g, w.text_ln_b, s.config.ln_eps, &f.text_ln);

    Mat video(0, h);
    if (n_video > 0) {
        f.video_in = add_bias(ex.frames * w.feat_proj, w.feat_bias);
        for (Index j = 0; j < n_video; ++j)
            f.video_in.row(j) +=
                w.video_pos.row(j) + w.video_seg.row(static_cast<Index>(ex.segments[static_cast<std::size_t>(j)]));
        video = ln_forward(f.video_in, w.video_ln_g, w.video_ln_b, s.config.ln_eps, &f.video_ln);
    }
    f.hidden.resize(n_text + n_video, h);
    f.hidden.topRows(n_text) = text;
    if (n_video > 0) f.hidden.bottomRows(n_video) = video;
}

void run_forward(const ModelState& s, const Example& ex, Forward& f, bool need_temporal) {
    embed_forward(s, ex, f);
    require_finite(f.hidden, "input embeddings");
    const std::size_t n_text = ex.token_ids.size();
    const Index n_video = ex.frames.rows();
    f.mask = attention_mask(n_text, static_cast<std::size_t>(n_video), ex.ablation);
    f.cross.assign(s.weights.cross.size(), LayerCache{});
    for (std::size_t l = 0; l < s.weights.cross.size(); ++l) {
        f.hidden = layer_forward(s.weights.cross[l], f.hidden, f.mask, s.config.n_heads, s.config.ln_eps, &f.cross[l]);
        require_finite(f.hidden, "cross-modal layer");
    }
    f.out.local_text = f.hidden.topRows(ix(n_text));
    f.out.local_video = f.hidden.bottomRows(n_video);
    if (!need_temporal || n_video == 0) {
        f.out.final_video = f.out.local_video;
        return;
    }
    const AttentionMask full = AttentionMask::Ones(n_video, n_video);
    Mat y = f.out.local_video;
    f.temporal.assign(s.weights.temporal.size(), LayerCache{});
    for (std::size_t l = 0; l < s.weights.temporal.size(); ++l) {
        y = layer_forward(s.weights.temporal[l], y, full, s.config.n_heads, s.config.ln_eps, &f.temporal[l]);
        require_finite(y, "temporal layer");
    }
    f.out.final_video =
        f.out.local_video + ln_forward(y, s.weights.temporal_ln_g, s.weights.temporal_ln_b, s.config.ln_eps,
                                       &f.temporal_ln);
}

std::vector<std::size_t> plan_positions(const MaskingPlan& plan) {
    std::vector<std::size_t> out;
    out.reserve(plan.targets.size());
    for (const auto& t : plan.targets) out.push_back(t.position);
    return out;
}

double log_sum_exp(const VectorXd& z) {
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

}  // namespace

// -------------------------------------------------------------------------------------------------

Weights Weights::zeros_like() const {
    Weights z = *this;
    visit_tensors(z, [](const std::string&, Mat& m, bool) { m.setZero(); });
    return z;
}

std::size_t Weights::parameter_count() const {
    std::size_t n = 0;
    visit_tensors(*this, [&](const std::string&, const Mat& m, bool) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

Weights init_weights(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    const Index h = ix(cfg.hidden_dim);
    const double s = cfg.init_std;
    Weights w;
    w.tok_emb = gaussian(ix(cfg.vocab_size), h, s, rng);
    w.text_pos = gaussian(ix(cfg.max_text_len), h, s, rng);
    w.text_seg = gaussian(1, h, s, rng);
    w.text_ln_g = Mat::Ones(1, h);
    w.text_ln_b = Mat::Zero(1, h);
    w.feat_proj = gaussian(ix(cfg.feature_dim), h, s, rng);
    w.feat_bias = Mat::Zero(1, h);
    w.video_pos = gaussian(ix(cfg.max_video_len), h, s, rng);
    w.video_seg = gaussian(3, h, s, rng);
    w.video_ln_g = Mat::Ones(1, h);
    w.video_ln_b = Mat::Zero(1, h);
    for (std::size_t i = 0; i < cfg.n_cross_layers; ++i) w.cross.push_back(init_layer(cfg, rng));
    for (std::size_t i = 0; i < cfg.n_temporal_layers; ++i) w.temporal.push_back(init_layer(cfg, rng));
    w.temporal_ln_g = Mat::Ones(1, h);
    w.temporal_ln_b = Mat::Zero(1, h);
    w.mam_ln_g = Mat::Ones(1, h);
    w.mam_ln_b = Mat::Zero(1, h);
    w.mam_out = gaussian(h, ix(cfg.vocab_size), s, rng);
    w.mam_bias = Mat::Zero(1, ix(cfg.vocab_size));
    w.mem_proj = gaussian(h, ix(cfg.feature_dim), s, rng);
    w.mem_bias = Mat::Zero(1, ix(cfg.feature_dim));
    return w;
}

ModelState ModelState::create(const ModelConfig& cfg, Vocab vocab) {
    if (vocab.size() != cfg.vocab_size) throw std::invalid_argument("vocab size does not match the config");
    ModelState s;
    s.config = cfg;
    s.weights = init_weights(cfg, cfg.seed);
    s.vocab = std::move(vocab);
    return s;
}

AttentionMask attention_mask(std::size_t n_text, std::size_t n_video, Ablation ablation) {
    const Index n = ix(n_text + n_video);
    AttentionMask m = AttentionMask::Ones(n, n);
    if (ablation != Ablation::None && n_video > 0) {
        m.topRightCorner(ix(n_text), ix(n_video)).setZero();
        m.bottomLeftCorner(ix(n_video), ix(n_text)).setZero();
    }
    return m;
}

Mat embed_inputs(const ModelState& state, const Example& ex) {
    Forward f;
    embed_forward(state, ex, f);
    return f.hidden;
}

Mat cross_modal_encode(const ModelState& state, const Mat& embeddings, const AttentionMask& mask) {
    Mat x = embeddings;
    for (const auto& l : state.weights.cross) x = layer_forward(l, x, mask, state.config.n_heads, state.config.ln_eps, nullptr);
    return x;
}

Mat temporal_encode(const ModelState& state, const Mat& local_video) {
    if (local_video.rows() == 0) return local_video;
    const AttentionMask full = AttentionMask::Ones(local_video.rows(), local_video.rows());
    Mat y = local_video;
    for (const auto& l : state.weights.temporal)
        y = layer_forward(l, y, full, state.config.n_heads, state.config.ln_eps, nullptr);
    return local_video +
           ln_forward(y, state.weights.temporal_ln_g, state.weights.temporal_ln_b, state.config.ln_eps, nullptr);
}

EncoderOutput encode(const ModelState& state, const Example& ex) {
    Forward f;
    run_forward(state, ex, f, true);
    return std::move(f.out);
}

Mat mam_logits(const ModelState& state, const Mat& local_text, const std::vector<std::size_t>& positions) {
    const auto& w = state.weights;
    Mat rows(ix(positions.size()), local_text.cols());
    for (std::size_t i = 0; i < positions.size(); ++i) rows.row(ix(i)) = local_text.row(ix(positions[i]));
    const Mat hn = ln_forward(rows, w.mam_ln_g, w.mam_ln_b, state.config.ln_eps, nullptr);
    return add_bias(hn * w.mam_out, w.mam_bias);
}

double mam_loss(const ModelState& state, const Mat& local_text, const MaskingPlan& plan) {
    if (plan.empty()) throw std::invalid_argument("MAM loss needs at least one target");
    const Mat logits = mam_logits(state, local_text, plan_positions(plan));
    double loss = 0.0;
    for (std::size_t i = 0; i < plan.targets.size(); ++i) {
        const VectorXd z = logits.row(ix(i)).transpose();
        loss += log_sum_exp(z) - z(plan.targets[i].original);
    }
    return loss / static_cast<double>(plan.targets.size());
}

VectorXd mem_scores(const ModelState& state, const Mat& final_video, const MemTarget& target) {
    if (target.candidates.size() == 0) throw std::invalid_argument("empty candidate set");
    const VectorXd q =
        (final_video.row(ix(target.frame)) * state.weights.mem_proj + state.weights.mem_bias).transpose();
    return target.candidates.features * q;
}

std::size_t argmax_lowest(const VectorXd& v) {
    if (v.size() == 0) throw std::invalid_argument("argmax of an empty vector");
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return static_cast<std::size_t>(best);
}

std::vector<TokenId> mam_predict(const ModelState& state, const Example& ex) {
    if (ex.plan.empty()) throw std::invalid_argument("no MAM targets to predict");
    Forward f;
    run_forward(state, ex, f, false);
    const Mat logits = mam_logits(state, f.out.local_text, plan_positions(ex.plan));
    std::vector<TokenId> out;
    for (Index i = 0; i < logits.rows(); ++i)
        out.push_back(static_cast<TokenId>(argmax_lowest(logits.row(i).transpose())));
    return out;
}

std::vector<std::size_t> mem_predict(const ModelState& state, const Example& ex) {
    Forward f;
    run_forward(state, ex, f, true);
    std::vector<std::size_t> out;
    for (const auto& t : ex.mem_targets) out.push_back(argmax_lowest(mem_scores(state, f.out.final_video, t)));
    return out;
}

double loss_and_grad(const ModelState& state, const Example& ex, Task task, Weights* grad, double scale) {
    const auto& w = state.weights;
    const auto& cfg = state.config;
    Forward f;
    run_forward(state, ex, f, task == Task::Mem);
    const Index n_text = ix(ex.token_ids.size());
    const Index n_video = ex.frames.rows();
    const Index h = ix(cfg.hidden_dim);

    Mat d_text = Mat::Zero(n_text, h);
    Mat d_local_video = Mat::Zero(n_video, h);
    Mat d_final = Mat::Zero(n_video, h);
    double loss = 0.0;

    if (task == Task::Mam) {
        if (ex.plan.empty()) throw std::invalid_argument("MAM loss needs at least one target");
        const auto positions = plan_positions(ex.plan);
        const double inv = 1.0 / static_cast<double>(positions.size());
        Mat rows(ix(positions.size()), h);
        for (std::size_t i = 0; i < positions.size(); ++i) rows.row(ix(i)) = f.out.local_text.row(ix(positions[i]));
        LnCache lc;
        const Mat hn = ln_forward(rows, w.mam_ln_g, w.mam_ln_b, cfg.ln_eps, &lc);
        const Mat logits = add_bias(hn * w.mam_out, w.mam_bias);
        Mat dlogits(logits.rows(), logits.cols());
        for (Index i = 0; i < logits.rows(); ++i) {
            const VectorXd z = logits.row(i).transpose();
            const double lse = log_sum_exp(z);
            const TokenId y = ex.plan.targets[static_cast<std::size_t>(i)].original;
            loss += lse - z(y);
            dlogits.row(i) = (z.array() - lse).exp().transpose();
            dlogits(i, y) -= 1.0;
        }
        loss *= inv;
        if (!std::isfinite(loss)) throw NumericalError("non-finite MAM loss");
        if (!grad) return loss;
        dlogits *= inv * scale;
        grad->mam_out += hn.transpose() * dlogits;
        grad->mam_bias += dlogits.colwise().sum();
        const Mat dhn = dlogits * w.mam_out.transpose();
        const Mat drows = ln_backward(dhn, lc, w.mam_ln_g, &grad->mam_ln_g, &grad->mam_ln_b);
        for (std::size_t i = 0; i < positions.size(); ++i) d_text.row(ix(positions[i])) += drows.row(ix(i));
    } else {
        if (ex.mem_targets.empty()) throw std::invalid_argument("MEM loss needs at least one target");
        const double inv = 1.0 / static_cast<double>(ex.mem_targets.size());
        const double tau = cfg.nce_temperature;
        struct Term {
            VectorXd dz;
        };
        std::vector<Term> terms;
        for (const auto& t : ex.mem_targets) {
            const VectorXd z = mem_scores(state, f.out.final_video, t) / tau;
            const double lse = log_sum_exp(z);
            loss += lse - z(ix(t.candidates.positive));
            VectorXd dz = (z.array() - lse).exp();
            dz(ix(t.candidates.positive)) -= 1.0;
            terms.push_back({std::move(dz)});
        }
        loss *= inv;
        if (!std::isfinite(loss)) throw NumericalError("non-finite MEM loss");
        if (!grad) return loss;
        for (std::size_t i = 0; i < ex.mem_targets.size(); ++i) {
            const auto& t = ex.mem_targets[i];
            const Mat dq = (terms[i].dz.transpose() * t.candidates.features) * (inv * scale / tau);  // 1 x D
            grad->mem_proj += f.out.final_video.row(ix(t.frame)).transpose() * dq;
            grad->mem_bias += dq;
            d_final.row(ix(t.frame)) += dq * w.mem_proj.transpose();
        }
        d_local_video += d_final;
        Mat dy = ln_backward(d_final, f.temporal_ln, w.temporal_ln_g, &grad->temporal_ln_g, &grad->temporal_ln_b);
        const AttentionMask full = AttentionMask::Ones(n_video, n_video);
        for (std::size_t l = w.temporal.size(); l-- > 0;)
            dy = layer_backward(w.temporal[l], f.temporal[l], dy, full, cfg.n_heads, grad->temporal[l]);
        d_local_video += dy;
    }

    Mat dh(n_text + n_video, h);
    dh.topRows(n_text) = d_text;
    if (n_video > 0) dh.bottomRows(n_video) = d_local_video;
    for (std::size_t l = w.cross.size(); l-- > 0;)
        dh = layer_backward(w.cross[l], f.cross[l], dh, f.mask, cfg.n_heads, grad->cross[l]);

    const Mat d_text_in =
        ln_backward(dh.topRows(n_text), f.text_ln, w.text_ln_g, &grad->text_ln_g, &grad->text_ln_b);
    for (Index i = 0; i < n_text; ++i) {
        grad->tok_emb.row(ex.token_ids[static_cast<std::size_t>(i)]) += d_text_in.row(i);
        grad->text_pos.row(i) += d_text_in.row(i);
    }
    grad->text_seg += d_text_in.colwise().sum();

    if (n_video > 0) {
        const Mat d_video_in =
            ln_backward(dh.bottomRows(n_video), f.video_ln, w.video_ln_g, &grad->video_ln_g, &grad->video_ln_b);
        grad->feat_proj += ex.frames.transpose() * d_video_in;
        grad->feat_bias += d_video_in.colwise().sum();
        for (Index j = 0; j < n_video; ++j) {
            grad->video_pos.row(j) += d_video_in.row(j);
            grad->video_seg.row(static_cast<Index>(ex.segments[static_cast<std::size_t>(j)])) += d_video_in.row(j);
        }
    }
    return loss;
}

}  // namespace cae::model
