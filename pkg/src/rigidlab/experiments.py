"""Experiment recipes: each takes a validated ExperimentConfig and returns {filename: text}.

Only files whose extension is listed in ``emit`` are written by :func:`run_experiment`.
"""

import os

import numpy as np

from . import appendix, dpp, gaf, lattice, measures
from .errors import BadParams, NotAchieved
from .export import csv_text, json_text, svg_scatter
from .rigidity import C_VAR_GAF, DppProcess, GafProcess, LatticeProcess, certificate_scan, recover_inside_moments
from .rigidity import unit_test_function
from .seeding import replica_map


def build_measure(p, j_max=0):
    """RadialMeasure from the measure keys of a config section."""
    try:
        if p.measure == "ginibre":
            return measures.ginibre()
        if p.measure == "bergman":
            return measures.bergman()
        if p.measure == "gaussian_power":
            return measures.RadialMeasure(measures.GaussianPower(p.a, p.b, p.c))
        if p.measure == "disk_uniform":
            return measures.RadialMeasure(measures.DiskUniform(p.radius))
        m = measures.RadialMeasure(measures.Tabulated(tuple(p.x), tuple(p.w)))
        return m.with_inverse_tables(j_max)
    except ValueError as exc:
        raise BadParams(str(exc), measure=p.measure) from None


def _ladder(cfg):
    p = cfg.params
    lad = measures.compute_moments(build_measure(p), p.J)
    return lad


def run_ladder(cfg):
    lad = _ladder(cfg)
    h = cfg.hash
    rows = [(j, lad.log_c[j], lad.mu[j], lad.sigma[j], lad.nu[j]) for j in range(lad.J + 1)]
    return {
        "ladder.csv": csv_text(["j", "log_c", "mu", "sigma", "nu"], rows, h),
        "ladder.json": json_text({"measure": lad.measure_name, "J": lad.J, "mu": lad.mu[: lad.J + 1],
                                  "sigma": lad.sigma[: lad.J + 1], "nu": lad.nu}, h),
    }


def run_classify(cfg):
    p = cfg.params
    lad = _ladder(cfg)
    res = measures.classify_rigidity(lad, p.abs_continuous, strict=p.strict)
    sp, npart = np.cumsum(lad.sigma[: lad.J + 1]), np.cumsum(lad.nu)
    rows = [(j, lad.sigma[j], lad.nu[j], sp[j], npart[j]) for j in range(lad.J + 1)]
    h = cfg.hash
    return {
        "classify.csv": csv_text(["j", "sigma", "nu", "sigma_partial", "nu_partial"], rows, h),
        "classify.json": json_text({"measure": lad.measure_name, "verdict": res.verdict,
                                    "diagnostics": res.diagnostics}, h),
    }


def run_sample_gaf(cfg):
    p, e = cfg.params, cfg.experiment
    h = cfg.hash
    out, rows, summary = {}, [], []
    for alpha in p.alphas:
        model = gaf.GafModel(alpha, p.R)
        # every alpha reuses the same replica streams
        cfgs = replica_map(lambda rng, seed, i: gaf.sample_zero_set(model, rng, seed), e.master_seed, e.replicas)
        counts = [len(c) for c in cfgs]
        rows += [(alpha, i, n) for i, n in enumerate(counts)]
        summary.append({"alpha": alpha, "R": p.R, "K": model.K, "mean_count": float(np.mean(counts)),
                        "expected_count": gaf.expected_count(model, p.R), "counts": counts})
        out[f"gaf_alpha_{alpha!r}.svg"] = svg_scatter(cfgs[0].points, p.R, f"GAF zeros alpha={alpha!r}", h)
    out["sample_gaf.csv"] = csv_text(["alpha", "replica", "count"], rows, h)
    out["sample_gaf.json"] = json_text({"samples": summary}, h)
    return out


def run_sample_dpp(cfg):
    p, e = cfg.params, cfg.experiment
    model = dpp.RadialDppModel(build_measure(p, p.n), p.n)

    def one(rng, seed, i):
        if p.mode == "moduli":
            return dpp.sample_moduli(model, rng).astype(complex)
        return dpp.sample_full(model, rng, seed).points

    pts = replica_map(one, e.master_seed, e.replicas)
    h = cfg.hash
    rows = [(i, j, z.real, z.imag) for i, zs in enumerate(pts) for j, z in enumerate(zs)]
    radius = DppProcess(model).support_radius
    return {
        "sample_dpp.csv": csv_text(["replica", "index", "re", "im"], rows, h),
        "sample_dpp.json": json_text({"model": model.tag, "mode": p.mode, "replicas": e.replicas,
                                      "points_per_replica": model.n + 1}, h),
        "sample_dpp.svg": svg_scatter(pts[0], radius, f"{model.tag} ({p.mode})", h),
    }


def run_sample_lattice(cfg):
    p, e = cfg.params, cfg.experiment
    model = lattice.PerturbedLatticeModel(p.beta, p.M, p.symmetric)
    xs = replica_map(lambda rng, seed, i: lattice.sample(model, rng, seed).points, e.master_seed, e.replicas)
    h = cfg.hash
    rows = [(i, j, x) for i, v in enumerate(xs) for j, x in enumerate(v)]
    return {
        "sample_lattice.csv": csv_text(["replica", "index", "x"], rows, h),
        "sample_lattice.json": json_text({"beta": p.beta, "M": p.M, "symmetric": p.symmetric,
                                          "replicas": e.replicas}, h),
        "sample_lattice.svg": svg_scatter(xs[0], np.inf, f"perturbed lattice beta={p.beta!r}", h),
    }


def _process(p):
    if p.process == "lattice":
        return LatticeProcess(p.beta)
    if p.process == "gaf":
        return GafProcess(p.alpha)
    return DppProcess(dpp.RadialDppModel(build_measure(p, p.n), p.n))


def run_variance_sweep(cfg):
    p = cfg.params
    proc = _process(p)
    tf = unit_test_function(p.function, p.k, p.r0, p.eps)
    Ls = list(p.Ls)
    var = [float(proc.variance(tf, L)) for L in Ls]
    bound = None
    if p.bound:
        if p.process != "gaf":
            raise BadParams("bound column is only available for the GAF", process=p.process)
        # C_beta = 1: the bound's shape in L, scaled by the same c_var as the variance
        bound = [C_VAR_GAF * gaf.variance_bound(gaf.GafModel(p.alpha, 1.0, K=1), tf, L) for L in Ls]
    pos = [(L, v) for L, v in zip(Ls, var) if v > 0]
    slope = lattice.loglog_slope(*zip(*pos)) if len(pos) >= 2 else None
    bslope = lattice.loglog_slope(Ls, bound) if bound and len(Ls) >= 2 else None
    rows = [(L, v, None if bound is None else b) for L, v, b in zip(Ls, var, bound or [None] * len(Ls))]
    h = cfg.hash
    return {
        "variance_sweep.csv": csv_text(["L", "variance", "bound"], rows, h),
        "variance_sweep.json": json_text({"process": proc.tag, "function": tf.kind, "L": Ls, "variance": var,
                                          "bound": bound, "loglog_slope": slope, "bound_slope": bslope}, h),
    }


def run_palm_sweep(cfg):
    p, e = cfg.params, cfg.experiment
    ests = dpp.palm_sweep(build_measure(p, max(p.ns)), p.ns, e.replicas, e.master_seed)
    rows = [(x.n, x.replicas, x.mean_min, x.standard_error) for x in ests]
    h = cfg.hash
    return {
        "palm_sweep.csv": csv_text(["n", "replicas", "mean_min", "standard_error"], rows, h),
        "palm_sweep.json": json_text({"measure": p.measure, "estimates": [list(r) for r in rows]}, h),
    }


def _checkpoints(p):
    if p.checkpoints:
        ks = sorted({k for k in p.checkpoints if k <= p.K_max} | {p.K_max})
    else:
        ks = sorted({10**i for i in range(int(np.log10(p.K_max)) + 1)} | {p.K_max})
    return ks


def run_kakutani_sweep(cfg):
    p = cfg.params
    prod = lattice.kakutani_product(p.beta, p.K_max)
    ks = _checkpoints(p)
    rows = [(K, prod[K]) for K in ks]
    h = cfg.hash
    return {
        "kakutani_sweep.csv": csv_text(["K", "partial_product"], rows, h),
        "kakutani_sweep.json": json_text({"beta": p.beta, "K_max": p.K_max, "limit_estimate": prod[-1],
                                          "rows": [list(r) for r in rows]}, h),
    }


def run_recover(cfg):
    p, e = cfg.params, cfg.experiment
    proc = _process(p)
    h = cfg.hash
    eps, L = p.epsilon, p.L
    cert = None
    if p.delta is not None:
        try:
            c = certificate_scan(proc, p.function, 0, p.r0, p.delta)
        except NotAchieved as err:
            cert = {"status": "NotAchieved", "delta": p.delta, "best": err.best,
                    "evaluated": [list(t) for t in err.context.get("evaluated", ())]}
            rows = [(ep, LL, v) for ep, LL, v in err.context.get("evaluated", ())]
            return {
                "recover.csv": csv_text(["epsilon", "L", "variance"], rows, h),
                "recover.json": json_text({"process": proc.tag, "certificate": cert}, h),
            }
        eps, L = c.epsilon, c.L
        cert = {"status": "Achieved", "delta": p.delta, "epsilon": eps, "L": L,
                "achieved_variance": c.achieved_variance}
    rep = recover_inside_moments(proc, p.r0, p.k_max, eps, L, e.replicas, e.master_seed,
                                 kind=p.function, predict=p.predict)
    cols = ["k", "success_rate", "residual_variance", "residual_variance_se", "predicted_variance", "epsilon", "L"]
    rows = [[r[c] for c in cols] for r in rep.summary_rows()]
    d = rep.to_dict()
    d["certificate"] = cert
    return {"recover.csv": csv_text(cols, rows, h), "recover.json": json_text(d, h)}


def run_appendix(cfg):
    d = appendix.appendix_report_dict(cfg.params.half_window)
    pc = d["two_dependent"]["pair_conditional"]
    rows = [(k, v["probability"], v["P_X0_is_1"]) for k, v in sorted(pc.items())]
    h = cfg.hash
    return {
        "appendix.csv": csv_text(["X1X-1", "probability", "P_X0_is_1"], rows, h),
        "appendix.json": json_text(d, h),
    }


def run_mixture(cfg):
    p, e = cfg.params, cfg.experiment
    model = dpp.RadialDppModel(build_measure(p, p.n), p.n)
    base = None if p.base_diag is None else np.diag(p.base_diag)
    rep = dpp.mixture_demo(model, p.f, e.master_seed, e.replicas, base=base)
    rows = [("one_point", a, b, m, se, pr) for a, b, m, se, pr in rep.one_point]
    rows += [("two_point", a, b, m, se, pr) for a, b, m, se, pr in rep.two_point]
    h = cfg.hash
    return {
        "mixture.csv": csv_text(["statistic", "a", "b", "mc_mean", "se", "predicted"], rows, h),
        "mixture.json": json_text({"model": model.tag, "count_values": rep.count_values,
                                   "count_frequencies": rep.count_frequencies, "max_z_score": rep.max_z_score,
                                   "replicas": rep.replicas, "one_point": rep.one_point,
                                   "two_point": rep.two_point}, h),
    }


RUNNERS = {
    "Ladder": run_ladder,
    "Classify": run_classify,
    "SampleGaf": run_sample_gaf,
    "SampleDpp": run_sample_dpp,
    "SampleLattice": run_sample_lattice,
    "VarianceSweep": run_variance_sweep,
    "PalmSweep": run_palm_sweep,
    "KakutaniSweep": run_kakutani_sweep,
    "Recover": run_recover,
    "AppendixDemos": run_appendix,
    "MixtureDemo": run_mixture,
}


def artifacts(cfg):
    """All artifacts of the experiment, filtered by ``emit``."""
    files = RUNNERS[cfg.kind](cfg)
    keep = set(cfg.experiment.emit)
    return {name: text for name, text in files.items() if name.rsplit(".", 1)[-1] in keep}


def run_experiment(cfg, output_dir=None):
    """Compute every artifact first, then write them; returns the written paths."""
    files = artifacts(cfg)
    out = cfg.experiment.output_dir if output_dir is None else output_dir
    os.makedirs(out, exist_ok=True)
    paths = []
    for name in sorted(files):
        path = os.path.join(out, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(files[name])
        paths.append(path)
    return paths
