"""Command-line front end.

Exit codes: 0 accept / success, 1 error or malformed state, 2 audit reject,
3 reconstruction failed on singular coefficient draws.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import audit, fileformat as ff, mac, netcode
from .field import DEFAULT_Q, FieldError, FieldModulus, sample_uniform
from .linalg import FieldVector, SingularMatrixError
from .rng import SeededRng

EXIT_REJECT = 2
EXIT_RANK = 3


def _modulus(q: int) -> FieldModulus:
    try:
        return FieldModulus(q)
    except FieldError as exc:
        raise click.BadParameter(str(exc), param_hint="--q") from None


def _load_server(state: Path, man: ff.Manifest, u: int) -> audit.ServerState:
    if not 1 <= u <= man.n:
        raise click.ClickException(f"unknown server {u}; manifest has {man.n}")
    path = state / ff.server_filename(u)
    if not path.is_file():
        raise click.ClickException(f"missing server file {path.name}")
    sid, blocks, tags = ff.read_server(path)
    if sid != u or len(blocks) != man.d:
        raise click.ClickException(f"{path.name} does not describe server {u} with d={man.d}")
    return audit.ServerState(sid, blocks, tags)


def _guard(fn):
    """Turn library and format errors into exit code 1."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ff.FormatError, FieldError, audit.AuditError, mac.KeyGenError, OSError) as exc:
            raise click.ClickException(str(exc)) from None
    return wrapper


class _Group(click.Group):
    """Usage errors exit 1, keeping 2 reserved for audit rejects."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as exc:
            exc.show()
            sys.exit(1)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=_Group)
def main():
    """Homomorphic MACs and delegated storage auditing over GF(q)."""


@main.command()
@click.option("--file", "file_", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--q", type=int, default=DEFAULT_Q, show_default=True)
@click.option("--m", type=int, default=4, show_default=True, help="number of source blocks")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@_guard
def keygen(file_, q, m, seed, out_dir):
    """Pack FILE into blocks and derive client and verifier keys."""
    mod = _modulus(q)
    if m < 1:
        raise click.BadParameter("must be positive", param_hint="--m")
    data = file_.read_bytes()
    src = ff.pack_bytes(data, mod, m)
    augmented = netcode.augment(src)
    rng = SeededRng(seed)
    client = mac.intercw_keygen([w.vector for w in augmented], rng)
    out_dir.mkdir(parents=True, exist_ok=True)
    ff.write_source(out_dir / ff.SOURCE, src)
    ff.write_client_key(out_dir / ff.CLIENT_KEY, client, src.xi, src.m)
    ff.write_verifier_key(out_dir / ff.VERIFIER_KEY, client.verifier_view(), src.xi, src.m)
    man = ff.Manifest(ff.VERSION, q, src.xi, src.m, seed, len(data))
    for name in (ff.SOURCE, ff.CLIENT_KEY, ff.VERIFIER_KEY):
        man.digests[name] = ff.sha256_file(out_dir / name)
    man.save(out_dir)
    click.echo(f"keygen q={q} xi={src.xi} m={src.m} bytes={len(data)} -> {out_dir}")


@main.command()
@click.option("--state-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              required=True)
@click.option("--n", type=click.IntRange(1), default=3, show_default=True)
@click.option("--d", type=click.IntRange(1), default=4, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=1, show_default=True)
@_guard
def distribute(state_dir, n, d, seed):
    """Encode and tag d coded blocks for each of n servers."""
    man = ff.Manifest.load(state_dir)
    for name in (ff.SOURCE, ff.CLIENT_KEY):
        man.check_digest(state_dir, name)
    src = ff.read_source(state_dir / ff.SOURCE)
    client, _, _ = ff.read_client_key(state_dir / ff.CLIENT_KEY)
    servers = audit.distribute(netcode.augment(src), client, n, d, SeededRng(seed))
    for old in state_dir.glob("server_*.blk"):
        old.unlink()
    man.digests = {k: v for k, v in man.digests.items() if not k.startswith("server_")}
    for s in servers:
        name = ff.server_filename(s.server_id)
        ff.write_server(state_dir / name, s.server_id, s.blocks, s.tags, src.m)
        man.digests[name] = ff.sha256_file(state_dir / name)
    man.n, man.d = n, d
    man.save(state_dir)
    click.echo(f"distributed {n}x{d} coded blocks")


@main.command("audit")
@click.option("--state-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              required=True)
@click.option("--server", "server_id", type=int, required=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=2, show_default=True)
@_guard
def audit_cmd(state_dir, server_id, seed):
    """Challenge one server as the third-party verifier (needs only verifier.key)."""
    man = ff.Manifest.load(state_dir)
    man.check_digest(state_dir, ff.VERIFIER_KEY)
    vk, _, _ = ff.read_verifier_key(state_dir / ff.VERIFIER_KEY)
    server = _load_server(state_dir, man, server_id)
    tr = audit.Transcript()
    ok = audit.audit_server(server, vk, SeededRng(seed), tr)
    click.echo(tr.to_text(), nl=False)
    if not ok:
        sys.exit(EXIT_REJECT)


@main.command()
@click.option("--state-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              required=True)
@click.option("--server", "server_id", type=int, required=True)
@click.option("--slot", type=int, required=True)
@click.option("--target", type=click.Choice(["block", "tag"]), default="block", show_default=True)
@click.option("--coordinate", type=int, default=None)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=3, show_default=True)
@_guard
def corrupt(state_dir, server_id, slot, target, coordinate, seed):
    """Overwrite one stored field element on a server, as a faulty or malicious host would."""
    man = ff.Manifest.load(state_dir)
    server = _load_server(state_dir, man, server_id)
    bad = audit.adversary_corrupt(server, slot, SeededRng(seed), target, coordinate)
    ff.write_server(state_dir / ff.server_filename(server_id), bad.server_id, bad.blocks,
                    bad.tags, man.m)
    tr = audit.Transcript()
    tr.record("Corrupt", mac.SchemeId.INTER_CW.value, server=server_id, slot=slot, target=target)
    click.echo(tr.to_text(), nl=False)


@main.command()
@click.option("--scheme", type=click.Choice([s.value for s in mac.SchemeId]), required=True)
@click.option("--q", type=int, default=DEFAULT_Q, show_default=True)
@click.option("--dim", type=click.IntRange(3), default=4, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@_guard
def replay(scheme, q, dim, seed):
    """Two transmissions; the second is dropped and the first replayed."""
    tr = audit.adversary_replay(mac.SchemeId(scheme), SeededRng(seed), _modulus(q), dim)
    click.echo(tr.to_text(), nl=False)


@main.command()
@click.option("--state-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=4, show_default=True)
@click.option("--retries", type=click.IntRange(1), default=8, show_default=True)
@_guard
def reconstruct(state_dir, out, seed, retries):
    """Decode the file from m coded blocks drawn across all servers."""
    man = ff.Manifest.load(state_dir)
    pool = []
    for u in range(1, man.n + 1):
        pool.extend(_load_server(state_dir, man, u).blocks)
    if len(pool) < man.m:
        raise click.ClickException(f"only {len(pool)} coded blocks stored, need {man.m}")
    rng = SeededRng(seed)
    for _ in range(retries):
        picks = _sample_indices(rng, len(pool), man.m)
        try:
            src = netcode.decode([pool[i] for i in picks])
        except SingularMatrixError:
            continue
        out.write_bytes(ff.unpack_bytes(src, man.file_length))
        click.echo(f"reconstructed {man.file_length} bytes from blocks {sorted(picks)}")
        return
    click.echo(f"all {retries} draws had singular coefficient tails", err=True)
    sys.exit(EXIT_RANK)


def _sample_indices(rng: SeededRng, n: int, k: int) -> list[int]:
    idx = list(range(n))
    for i in range(k):
        j = i + audit._randbelow(rng, n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k]


@main.command("full-rank-rate")
@click.option("--q", type=int, default=13, show_default=True)
@click.option("--m", type=click.IntRange(1), default=2, show_default=True)
@click.option("--trials", type=click.IntRange(1), default=100_000, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
def full_rank_rate(q, m, trials, seed):
    """Empirical probability that m random coded blocks are decodable."""
    mod = _modulus(q)
    rate = netcode.full_rank_rate(mod, m, trials, SeededRng(seed))
    click.echo(f"empirical={rate:.6f} closed_form={netcode.full_rank_probability(q, m):.6f} "
               f"trials={trials}")


@main.command("stat-check")
@click.option("--q", type=int, default=13, show_default=True)
@click.option("--trials", type=click.IntRange(1), default=100_000, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
def stat_check(q, trials, seed):
    """Monte Carlo corruption-detection and tag-forgery rates at desk scale."""
    mod = _modulus(q)
    rng = SeededRng(seed)
    src = netcode.SourceFile(tuple(FieldVector.random(mod, 2, rng) for _ in range(2)))
    dep = audit.setup(src, 1, 4, rng)
    bad = audit.adversary_corrupt(dep.servers[0], 1, rng)
    detect = audit.detection_rate(bad, dep.verifier, trials, rng)
    forged = forged_acceptance_rate(dep.client, netcode.augment(src)[0].vector, trials, rng)
    click.echo(f"corruption_detected={detect:.6f} bound={1 - 1 / q:.6f} trials={trials}")
    click.echo(f"forged_tag_accepted={forged:.6f} bound={1 / q:.6f} trials={trials}")


def forged_acceptance_rate(ks, message, trials, rng) -> float:
    """Share of uniformly random tags the inner-product check accepts for one message."""
    hits = 0
    for _ in range(trials):
        forged = mac.TagValue(sample_uniform(ks.modulus, rng))
        hits += mac.ip_verify(message, forged, ks)
    return hits / trials


if __name__ == "__main__":
    main()
