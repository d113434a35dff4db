"""GRU encoder-decoder with Luong (general) attention, built on numpy.

Forward, cross-entropy loss, exact analytic backpropagation, Adam, and
greedy/beam decoding. Everything runs in float64 so the gradients can be
held to finite-difference fidelity; batches are processed as (B, ...)
arrays with PAD-masked loss.

Parameters live in a plain {name: ndarray} dict:

    emb_in (V,E)   emb_out (V,E)
    {enc,dec}_{Wz,Wr,Wh} (E,H)   {enc,dec}_{Uz,Ur,Uh} (H,H)
    {enc,dec}_{bz,br,bh} (H,)
    W_att (H,H)    W_out (2H,V)   b_out (V,)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict, field

import numpy as np

PAD, SOS, EOS = 0, 1, 2

CHECKPOINT_VERSION = 1


class ModelError(RuntimeError):
    pass


class CheckpointError(RuntimeError):
    pass


@dataclass
class Hyperparams:
    hidden_size: int = 256
    embed_size: int = 128
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 100
    grad_clip_norm: float = 5.0
    teacher_forcing_ratio: float = 1.0
    max_decode_len: int = 40
    seed: int = 0

    def validate(self) -> None:
        if min(self.hidden_size, self.embed_size, self.batch_size) < 1:
            raise ValueError("sizes must be positive")
        if not 0.0 <= self.teacher_forcing_ratio <= 1.0:
            raise ValueError("teacher_forcing_ratio must be in [0, 1]")


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(x, axis=-1):
    shifted = x - np.max(x, axis=axis, keepdims=True)
    ex = np.exp(shifted)
    return ex / np.sum(ex, axis=axis, keepdims=True)


def init_params(vocab_size: int, hyper: Hyperparams, rng: np.random.Generator) -> dict:
    hyper.validate()
    E, H, V = hyper.embed_size, hyper.hidden_size, vocab_size

    def u(*shape):
        return rng.uniform(-0.08, 0.08, size=shape)

    params = {"emb_in": u(V, E), "emb_out": u(V, E)}
    for side in ("enc", "dec"):
        for gate in ("z", "r", "h"):
            params[f"{side}_W{gate}"] = u(E, H)
            params[f"{side}_U{gate}"] = u(H, H)
            params[f"{side}_b{gate}"] = np.zeros(H)
    params["W_att"] = u(H, H)
    params["W_out"] = u(2 * H, V)
    params["b_out"] = np.zeros(V)
    return params


# ---------------------------------------------------------------------------
# GRU cell

def _gru_forward(x, h, params, side):
    """x (B,E), h (B,H) -> h', cache. Convention: h' = (1-z)*h + z*h_cand."""
    z = _sigmoid(x @ params[f"{side}_Wz"] + h @ params[f"{side}_Uz"] + params[f"{side}_bz"])
    r = _sigmoid(x @ params[f"{side}_Wr"] + h @ params[f"{side}_Ur"] + params[f"{side}_br"])
    rh = r * h
    hc = np.tanh(x @ params[f"{side}_Wh"] + rh @ params[f"{side}_Uh"] + params[f"{side}_bh"])
    h2 = (1.0 - z) * h + z * hc
    return h2, (x, h, z, r, rh, hc)


def _gru_backward(dh2, cache, params, grads, side):
    """Returns (dx, dh_prev); accumulates weight grads in `grads`."""
    x, h, z, r, rh, hc = cache
    dz = dh2 * (hc - h)
    dhc = dh2 * z
    dh = dh2 * (1.0 - z)

    dah = dhc * (1.0 - hc * hc)
    grads[f"{side}_Wh"] += x.T @ dah
    grads[f"{side}_Uh"] += rh.T @ dah
    grads[f"{side}_bh"] += dah.sum(axis=0)
    dx = dah @ params[f"{side}_Wh"].T
    drh = dah @ params[f"{side}_Uh"].T
    dr = drh * h
    dh += drh * r

    dar = dr * r * (1.0 - r)
    grads[f"{side}_Wr"] += x.T @ dar
    grads[f"{side}_Ur"] += h.T @ dar
    grads[f"{side}_br"] += dar.sum(axis=0)
    dx += dar @ params[f"{side}_Wr"].T
    dh += dar @ params[f"{side}_Ur"].T

    daz = dz * z * (1.0 - z)
    grads[f"{side}_Wz"] += x.T @ daz
    grads[f"{side}_Uz"] += h.T @ daz
    grads[f"{side}_bz"] += daz.sum(axis=0)
    dx += daz @ params[f"{side}_Wz"].T
    dh += daz @ params[f"{side}_Uz"].T
    return dx, dh


def gru_cell(x: np.ndarray, h: np.ndarray, params: dict, side: str = "enc") -> np.ndarray:
    """Single-vector GRU step (public contract; batch code is internal)."""
    h2, _ = _gru_forward(x[None, :], h[None, :], params, side)
    return h2[0]


# ---------------------------------------------------------------------------
# Encoder / attention

def encode(input_ids, params: dict) -> tuple[np.ndarray, np.ndarray]:
    """Unidirectional scan over one sequence; returns (H_all (n,H), h_final)."""
    ids = np.asarray(input_ids, dtype=int)
    if ids.size == 0:
        raise ModelError("empty input sequence")
    H = params["enc_Uz"].shape[0]
    h = np.zeros((1, H))
    outs = []
    for tok in ids:
        x = params["emb_in"][tok][None, :]
        h, _ = _gru_forward(x, h, params, "enc")
        outs.append(h[0])
    return np.stack(outs), outs[-1]


def attend(dec_h: np.ndarray, H_enc: np.ndarray, params: dict) -> tuple[np.ndarray, np.ndarray]:
    """Luong general score: s_i = dec_h . (W_att @ ...) over encoder rows."""
    if H_enc.shape[0] == 0:
        raise ModelError("empty encoder output")
    q = dec_h @ params["W_att"]  # (H,)
    scores = H_enc @ q  # (n,)
    weights = _softmax(scores)
    context = weights @ H_enc
    return context, weights


# ---------------------------------------------------------------------------
# Batched forward / backward

@dataclass
class ForwardTrace:
    """Cached activations for exact backprop over one batch."""

    input_ids: np.ndarray  # (B, n)
    targets: np.ndarray  # (B, T)
    dec_inputs: np.ndarray  # (B, T-1) tokens actually fed to the decoder
    mask: np.ndarray  # (B, T-1) 1 where target token counts
    n_tokens: int
    enc_caches: list
    H_enc: np.ndarray  # (B, n, H)
    dec_caches: list
    dec_hs: list  # decoder hidden after each step, (B, H)
    att_qs: list  # (B, H) per step
    att_weights: list  # (B, n) per step
    contexts: list  # (B, H) per step
    probs: list  # softmax over vocab per step, (B, V)


def forward_batch(
    input_ids: np.ndarray,
    targets: np.ndarray,
    params: dict,
    hyper: Hyperparams,
    rng: np.random.Generator | None = None,
) -> tuple[float, ForwardTrace]:
    """Teacher-forced forward pass over a batch.

    input_ids (B, n) must share one length (fixed-shape encoder);
    targets (B, T) are SOS ... EOS right-padded with PAD.
    """
    input_ids = np.asarray(input_ids, dtype=int)
    targets = np.asarray(targets, dtype=int)
    if input_ids.ndim != 2 or targets.ndim != 2:
        raise ModelError("expected (B, n) inputs and (B, T) targets")
    B, n = input_ids.shape
    T = targets.shape[1]
    Hsz = params["enc_Uz"].shape[0]

    h = np.zeros((B, Hsz))
    enc_caches = []
    H_rows = []
    for t in range(n):
        x = params["emb_in"][input_ids[:, t]]
        h, cache = _gru_forward(x, h, params, "enc")
        enc_caches.append(cache)
        H_rows.append(h)
    H_enc = np.stack(H_rows, axis=1)  # (B, n, H)

    mask = (targets[:, 1:] != PAD).astype(float)
    n_tokens = int(mask.sum())
    if n_tokens == 0:
        raise ModelError("batch has no target tokens")

    dec_inputs = np.empty((B, T - 1), dtype=int)
    dec_caches, dec_hs, att_qs, att_weights, contexts, probs = [], [], [], [], [], []
    total_nll = 0.0
    prev_pred = None
    for t in range(T - 1):
        if t == 0 or hyper.teacher_forcing_ratio >= 1.0:
            tok = targets[:, t]
        else:
            force = rng is not None and rng.random() < hyper.teacher_forcing_ratio
            tok = targets[:, t] if force else prev_pred
        dec_inputs[:, t] = tok
        x = params["emb_out"][tok]
        h, cache = _gru_forward(x, h, params, "dec")
        dec_caches.append(cache)
        dec_hs.append(h)
        q = h @ params["W_att"]  # (B, H)
        scores = np.einsum("bh,bnh->bn", q, H_enc)
        w = _softmax(scores, axis=1)
        c = np.einsum("bn,bnh->bh", w, H_enc)
        att_qs.append(q)
        att_weights.append(w)
        contexts.append(c)
        u = np.concatenate([h, c], axis=1)
        logits = u @ params["W_out"] + params["b_out"]
        p = _softmax(logits, axis=1)
        probs.append(p)
        prev_pred = np.argmax(p, axis=1)
        tgt = targets[:, t + 1]
        picked = np.clip(p[np.arange(B), tgt], 1e-300, None)
        total_nll += float(-(np.log(picked) * mask[:, t]).sum())

    loss = total_nll / n_tokens
    trace = ForwardTrace(
        input_ids=input_ids,
        targets=targets,
        dec_inputs=dec_inputs,
        mask=mask,
        n_tokens=n_tokens,
        enc_caches=enc_caches,
        H_enc=H_enc,
        dec_caches=dec_caches,
        dec_hs=dec_hs,
        att_qs=att_qs,
        att_weights=att_weights,
        contexts=contexts,
        probs=probs,
    )
    return loss, trace


def forward_loss(pair, params: dict, hyper: Hyperparams, rng=None):
    """Single-pair convenience wrapper around forward_batch."""
    inp = np.asarray(pair.input_ids, dtype=int)[None, :]
    tgt = np.asarray(pair.target_ids, dtype=int)[None, :]
    return forward_batch(inp, tgt, params, hyper, rng)


def backward(trace: ForwardTrace, params: dict) -> dict:
    """Exact gradients of the masked mean cross-entropy."""
    grads = {name: np.zeros_like(arr) for name, arr in params.items()}
    B, n = trace.input_ids.shape
    Hsz = params["enc_Uz"].shape[0]
    T1 = len(trace.dec_caches)

    dH_enc = np.zeros_like(trace.H_enc)
    dh_next = np.zeros((B, Hsz))
    for t in range(T1 - 1, -1, -1):
        tgt = trace.targets[:, t + 1]
        dlogits = trace.probs[t].copy()
        dlogits[np.arange(B), tgt] -= 1.0
        dlogits *= trace.mask[:, t][:, None] / trace.n_tokens

        h_t = trace.dec_hs[t]
        c_t = trace.contexts[t]
        u = np.concatenate([h_t, c_t], axis=1)
        grads["W_out"] += u.T @ dlogits
        grads["b_out"] += dlogits.sum(axis=0)
        du = dlogits @ params["W_out"].T
        dh = dh_next + du[:, :Hsz]
        dc = du[:, Hsz:]

        # attention backward
        w = trace.att_weights[t]
        q = trace.att_qs[t]
        da = np.einsum("bh,bnh->bn", dc, trace.H_enc)
        dH_enc += w[:, :, None] * dc[:, None, :]
        ds = w * (da - (w * da).sum(axis=1, keepdims=True))
        v = np.einsum("bn,bnh->bh", ds, trace.H_enc)  # d loss / d q
        grads["W_att"] += h_t.T @ v
        dh += v @ params["W_att"].T
        dH_enc += ds[:, :, None] * q[:, None, :]

        dx, dh_next = _gru_backward(dh, trace.dec_caches[t], params, grads, "dec")
        np.add.at(grads["emb_out"], trace.dec_inputs[:, t], dx)

    # decoder h0 is the encoder final hidden
    dh = dh_next
    for t in range(n - 1, -1, -1):
        dh = dh + dH_enc[:, t]
        dx, dh = _gru_backward(dh, trace.enc_caches[t], params, grads, "enc")
        np.add.at(grads["emb_in"], trace.input_ids[:, t], dx)
    return grads


# ---------------------------------------------------------------------------
# Optimizer

@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def global_norm(grads: dict) -> float:
    return float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))


def clip_gradients(grads: dict, clip_norm: float) -> dict:
    """Scale all gradients so the global norm is at most clip_norm."""
    norm = global_norm(grads)
    if clip_norm <= 0 or norm <= clip_norm:
        return grads
    scale = clip_norm / norm
    return {name: g * scale for name, g in grads.items()}


def apply_update(
    params: dict, grads: dict, opt: AdamState, hyper: Hyperparams,
    beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
) -> dict:
    """Global-norm clipping then Adam, in place on `params`."""
    for g in grads.values():
        if not np.all(np.isfinite(g)):
            raise ModelError("non-finite gradient")
    grads = clip_gradients(grads, hyper.grad_clip_norm)
    opt.t += 1
    for name, g in grads.items():
        if name not in opt.m:
            opt.m[name] = np.zeros_like(g)
            opt.v[name] = np.zeros_like(g)
        opt.m[name] = beta1 * opt.m[name] + (1 - beta1) * g
        opt.v[name] = beta2 * opt.v[name] + (1 - beta2) * g * g
        m_hat = opt.m[name] / (1 - beta1 ** opt.t)
        v_hat = opt.v[name] / (1 - beta2 ** opt.t)
        params[name] -= hyper.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    return params


# ---------------------------------------------------------------------------
# Decoding

def _decode_step(tok: int, h: np.ndarray, H_enc: np.ndarray, params: dict):
    x = params["emb_out"][tok]
    h = gru_cell(x, h, params, "dec")
    context, _ = attend(h, H_enc, params)
    logits = np.concatenate([h, context]) @ params["W_out"] + params["b_out"]
    return h, logits


def generate(
    input_ids,
    params: dict,
    mode: str = "greedy",
    beam_width: int = 3,
    max_decode_len: int = 40,
) -> list[int]:
    """Decode token ids (without SOS/EOS) for one input sequence."""
    if max_decode_len <= 0:
        return []
    H_enc, h0 = encode(input_ids, params)
    if mode == "greedy" or (mode == "beam" and beam_width == 1):
        h, tok, out = h0, SOS, []
        for _ in range(max_decode_len):
            h, logits = _decode_step(tok, h, H_enc, params)
            tok = int(np.argmax(logits))  # ties -> lowest id
            if tok == EOS:
                break
            out.append(tok)
        return out
    if mode != "beam":
        raise ModelError(f"unknown decode mode {mode!r}")

    # Beam search over log-probabilities; finished hypotheses are scored
    # by length-normalized log-probability (length includes EOS).
    beams = [(0.0, [], h0, False)]  # (logp, tokens, h, finished)
    finished: list[tuple[float, list[int]]] = []
    for _ in range(max_decode_len):
        candidates = []
        for logp, toks, h, done in beams:
            if done:
                continue
            tok = toks[-1] if toks else SOS
            h2, logits = _decode_step(tok, h, H_enc, params)
            logprobs = logits - np.max(logits)
            logprobs = logprobs - np.log(np.sum(np.exp(logprobs)))
            order = np.lexsort((np.arange(len(logprobs)), -logprobs))
            for tid in order[:beam_width]:
                candidates.append((logp + float(logprobs[tid]), toks + [int(tid)], h2))
        if not candidates:
            break
        candidates.sort(key=lambda c: (-c[0], c[1]))
        beams = []
        for logp, toks, h in candidates[:beam_width]:
            if toks[-1] == EOS:
                finished.append((logp / len(toks), toks[:-1]))
            else:
                beams.append((logp, toks, h, False))
        if not beams:
            break
    if finished:
        finished.sort(key=lambda f: (-f[0], f[1]))
        return finished[0][1]
    beams.sort(key=lambda b: (-b[0] / max(1, len(b[1])), b[1]))
    return beams[0][1] if beams else []


# ---------------------------------------------------------------------------
# Checkpoints

def save_checkpoint(path: str, params: dict, hyper: Hyperparams, vocab_tokens: list[str]) -> None:
    import hashlib

    vocab_hash = hashlib.sha256(json.dumps(vocab_tokens).encode()).hexdigest()
    meta = {
        "version": CHECKPOINT_VERSION,
        "hyper": asdict(hyper),
        "vocab_hash": vocab_hash,
        "vocab": vocab_tokens,
        "param_names": sorted(params),
    }
    arrays = {f"param_{k}": v for k, v in params.items()}
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path: str, expected_vocab_hash: str | None = None):
    """Returns (params, hyper, vocab_tokens, vocab_hash)."""
    try:
        data = np.load(path, allow_pickle=False)
        meta = json.loads(bytes(data["meta"]))
    except Exception as exc:  # truncated/garbled file
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {meta.get('version')}")
    if expected_vocab_hash is not None and meta["vocab_hash"] != expected_vocab_hash:
        raise CheckpointError("checkpoint vocabulary does not match")
    params = {name: data[f"param_{name}"] for name in meta["param_names"]}
    hyper = Hyperparams(**meta["hyper"])
    return params, hyper, meta["vocab"], meta["vocab_hash"]


# ---------------------------------------------------------------------------
# Finite-difference gradient check (the project's foundational numeric test)

def finite_difference_check(
    params: dict,
    input_ids,
    target_ids,
    hyper: Hyperparams,
    epsilon: float = 1e-5,
) -> dict[str, float]:
    """Relative error per tensor: analytic vs central differences.

    Error is ||g_a - g_n||_inf / max(||g_a||_inf + ||g_n||_inf, 1e-12),
    i.e. scaled to the tensor's gradient magnitude so that entries whose
    true gradient is ~0 (where the difference quotient is pure roundoff)
    do not dominate.
    """
    inp = np.asarray(input_ids, dtype=int)[None, :]
    tgt = np.asarray(target_ids, dtype=int)[None, :]
    _, trace = forward_batch(inp, tgt, params, hyper)
    analytic = backward(trace, params)

    errors = {}
    for name, arr in params.items():
        numeric = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + epsilon
            lp, _ = forward_batch(inp, tgt, params, hyper)
            arr[idx] = orig - epsilon
            lm, _ = forward_batch(inp, tgt, params, hyper)
            arr[idx] = orig
            numeric[idx] = (lp - lm) / (2 * epsilon)
        a = analytic[name]
        diff = float(np.max(np.abs(a - numeric)))
        scale = max(float(np.max(np.abs(a))) + float(np.max(np.abs(numeric))), 1e-12)
        errors[name] = diff / scale
    return errors
