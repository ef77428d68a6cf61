use std::path::Path;

use serde::Serialize;
use serde_json::json;

use qdiscord::channels::{petz_equality_check, KrausChannel};
use qdiscord::discord::{
    self, construct_zero_discord_npartite, construct_zero_discord_one_sided, lazy_commutator_norm,
    product_commutator_norm, remark_eigenbasis_check, DiscordOptions, DiscordResult, JointProbTable, LocalBases,
    Side,
};
use qdiscord::dynamics::{trajectory, trajectory_csv, Hamiltonian, InteractionHamiltonian, Support};
use qdiscord::io::{self, ChannelJson, MatrixJson, PvmJson};
use qdiscord::measurements::{self, random_pvm, Pvm, Site};
use qdiscord::ssa::{bi_ssa_cmis, construct_bi_ssa_state, double_ssa_gap, BlockSpec};
use qdiscord::states::{self, DensityMatrix, RngSeed};
use qdiscord::{Error, Result};

use crate::{Basis, CheckArgs, CheckKind, Cli, Command, DiscordArgs, DynamicsArgs, GenArgs, GenKind, GlobalOpts, SideArg, Status};

pub fn run(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Gen(a) => gen(&cli.global, a),
        Command::Discord(a) => discord(&cli.global, a),
        Command::Check(a) => check(&cli.global, a),
        Command::Dynamics(a) => dynamics(&cli.global, a),
    }
}

/// Sub-seed `k` of the root seed: `splitmix64(seed ^ splitmix64(k))`.
fn sub_seed(seed: u64, k: u64) -> RngSeed {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    RngSeed(splitmix64(seed ^ splitmix64(k)))
}

fn emit(g: &GlobalOpts, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => {
            io::write_text(path, text)?;
            if !g.quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(g: &GlobalOpts, value: &T) -> Result<()> {
    emit(g, &io::to_json_string(value)?)
}

fn bipartite_dims(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::DimMismatch(format!("expected two subsystem dimensions, got {dims:?}"))),
    }
}

fn gen(g: &GlobalOpts, a: &GenArgs) -> Result<Status> {
    if a.dims.is_empty() || a.dims.contains(&0) {
        return Err(Error::BadParams(format!("invalid dimensions {:?}", a.dims)));
    }
    let dim: usize = a.dims.iter().product();
    let seed = RngSeed(g.seed);
    let state = match a.kind {
        GenKind::Random => states::random_density(&a.dims, a.rank.unwrap_or(dim), seed)?,
        GenKind::Pure => states::random_pure(&a.dims, seed)?,
        GenKind::Bell => states::bell(),
        GenKind::Ghz => states::ghz(a.n)?,
        GenKind::Cq => {
            let (da, db) = bipartite_dims(&a.dims)?;
            let parts = (0..db as u64)
                .map(|k| states::random_density(&[da], da, sub_seed(g.seed, k)))
                .collect::<Result<Vec<_>>>()?;
            let rho_b = states::random_density(&[db], db, sub_seed(g.seed, 1000))?;
            // √ρ_B Π_μ √ρ_B = λ_μ Π_μ only in the eigenbasis of ρ_B
            construct_zero_discord_one_sided(&parts, &rho_b, &measurements::eigenbasis_pvm(&rho_b))?
        }
        GenKind::ZeroDiscord => zero_discord(g.seed, &a.dims, a.mode)?,
        GenKind::BiSsa => construct_bi_ssa_state(&BlockSpec::random(seed)?)?,
        GenKind::Hamiltonian => {
            let h = if a.interaction {
                let (da, db) = bipartite_dims(&a.dims)?;
                InteractionHamiltonian::random([da, db], seed)?.as_hamiltonian()
            } else {
                Hamiltonian::random(&a.dims, seed)?
            };
            emit_json(g, &h.to_json())?;
            return Ok(Status::Done);
        }
    };
    emit_json(g, &io::state_to_json(&state))?;
    Ok(Status::Done)
}

/// Full-rank random marginals joined by a random table with matching marginals.
fn zero_discord(seed: u64, dims: &[usize], mode: Basis) -> Result<DensityMatrix> {
    if dims.len() < 2 {
        return Err(Error::DimMismatch("zero-discord states need at least two subsystems".into()));
    }
    let n = dims.len() as u64;
    let marginals = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| states::random_density(&[d], d, sub_seed(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let (bases, probs) = match mode {
        Basis::Eigenbasis => (LocalBases::Eigenbasis, marginals.iter().map(|m| m.eig().eigenvalues).collect()),
        Basis::Free => {
            let pvms = dims
                .iter()
                .enumerate()
                .map(|(k, &d)| random_pvm(d, &vec![1; d], sub_seed(seed, n + k as u64)))
                .collect::<Result<Vec<_>>>()?;
            let probs = marginals
                .iter()
                .zip(&pvms)
                .map(|(m, p)| measurements::outcome_probs(m, p, Site::Whole))
                .collect::<Result<Vec<_>>>()?;
            (LocalBases::Free(pvms), probs)
        }
    };
    let table = JointProbTable::random_with_marginals(&probs, sub_seed(seed, 2 * n))?;
    construct_zero_discord_npartite(&marginals, &bases, &table)
}

#[derive(Serialize)]
struct DiscordReport<'a> {
    side: &'static str,
    dims: &'a [usize],
    options: DiscordOptions,
    result: &'a DiscordResult,
}

fn discord(g: &GlobalOpts, a: &DiscordArgs) -> Result<Status> {
    let rho = io::read_state(&a.state)?;
    let opts = DiscordOptions { starts: g.starts, seed: g.seed, max_iter: a.max_iter, tol: a.opt_tol };
    let (side, result) = match a.side {
        SideArg::A => ("A", discord::discord_one_sided(&rho, Side::A, &opts)?),
        SideArg::B => ("B", discord::discord_one_sided(&rho, Side::B, &opts)?),
        SideArg::Sym => ("sym", discord::discord_symmetric(&rho, &opts)?),
        SideArg::Npartite => ("npartite", discord::discord_npartite(&rho, &opts)?),
    };
    emit_json(g, &DiscordReport { side, dims: rho.dims(), options: opts, result: &result })?;
    Ok(Status::Done)
}

fn read_pvm(path: &Path) -> Result<Pvm> {
    io::pvm_from_json(&io::read_json::<PvmJson>(path)?)
}

fn check(g: &GlobalOpts, a: &CheckArgs) -> Result<Status> {
    let rho = io::read_state(&a.state)?;
    let tol = g.tol;
    let (name, pass, metrics) = match a.what {
        CheckKind::Lazy => {
            let norm = lazy_commutator_norm(&rho)?;
            ("lazy", norm <= tol, json!({ "commutator_norm": norm }))
        }
        CheckKind::ProductCommutator => {
            let norm = product_commutator_norm(&rho)?;
            ("product-commutator", norm <= tol, json!({ "commutator_norm": norm }))
        }
        CheckKind::Remark => match &a.pvm {
            Some(path) => {
                let c = remark_eigenbasis_check(&rho, &read_pvm(path)?)?;
                let pass = c.offdiag_max <= tol && c.diag_residual_max <= tol;
                ("remark", pass, json!({ "offdiag_max": c.offdiag_max, "diag_residual_max": c.diag_residual_max }))
            }
            None => {
                let opts = DiscordOptions { starts: g.starts, seed: g.seed, ..Default::default() };
                let r = discord::discord_symmetric(&rho, &opts)?;
                let mut offdiag = Vec::new();
                for (k, pvm) in r.argmin.iter().enumerate() {
                    offdiag.push(remark_eigenbasis_check(&states::reduce(&rho, &[k])?, pvm)?.offdiag_max);
                }
                let worst = offdiag.iter().cloned().fold(0.0, f64::max);
                ("remark", worst <= tol, json!({ "discord": r.value, "offdiag_max": offdiag }))
            }
        },
        CheckKind::Petz => {
            let channel = match &a.channel {
                Some(path) => io::channel_from_json(&io::read_json::<ChannelJson>(path)?)?,
                None => KrausChannel::identity(rho.dim()),
            };
            let sigma = match &a.sigma {
                Some(path) => io::read_state(path)?,
                None => states::maximally_mixed(rho.dims())?,
            };
            let c = petz_equality_check(&rho, &sigma, &channel)?;
            ("petz", c.consistent, json!({ "gap": c.gap, "recovery_error": c.recovery_error }))
        }
        CheckKind::DoubleSsa => {
            let (_, db) = rho.bipartite_dims()?;
            let pvm = match &a.pvm {
                Some(path) => read_pvm(path)?,
                None => random_pvm(db, &vec![1; db], RngSeed(g.seed))?,
            };
            let d = double_ssa_gap(&rho, &pvm)?;
            let dev = d.max_deviation();
            (
                "double-ssa",
                dev <= tol,
                json!({ "i_acb": d.i_acb, "i_abc": d.i_abc, "relent_gap": d.relent_gap, "max_deviation": dev }),
            )
        }
        CheckKind::BiSsa => {
            let (x, y) = bi_ssa_cmis(&rho)?;
            ("bi-ssa", x <= tol && y <= tol, json!({ "cmi_ac_given_b": x, "cmi_bc_given_a": y }))
        }
    };
    #[derive(Serialize)]
    struct CheckReport {
        what: &'static str,
        tol: f64,
        pass: bool,
        metrics: serde_json::Value,
    }
    emit_json(g, &CheckReport { what: name, tol, pass, metrics })?;
    Ok(if pass { Status::Done } else { Status::CheckFailed })
}

fn dynamics(g: &GlobalOpts, a: &DynamicsArgs) -> Result<Status> {
    let rho = io::read_state(&a.state)?;
    let h = Hamiltonian::from_json(&io::read_json::<MatrixJson>(&a.hamiltonian)?)?;
    let support = if a.force_support { Support::Force } else { Support::Strict };
    let rows = trajectory(&rho, &h, a.t_max, a.steps, support)?;
    if !g.quiet {
        let worst = rows.iter().map(|r| r.max_fd_residual()).fold(0.0, f64::max);
        eprintln!("max |formula - fd| over {} rows: {worst:.3e}", rows.len());
    }
    emit(g, &trajectory_csv(&rows)?)?;
    Ok(Status::Done)
}
