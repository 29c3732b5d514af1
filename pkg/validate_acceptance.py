"""
Desk-scale acceptance run.
Runs the shipped experiment configs and a few closed-form checks, printing one
line per check. Exit status 0 when everything passed, 1 otherwise.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from src.analysis.fourier import SelfSimilarTransform
from src.analysis.measures import similarity_dimension
from src.core.config_loader import load_config
from src.core.experiment import Experiment
from src.core.presets import cantor
from src.models.similitude import Similitude
from ui.report_writer import ReportWriter

CONFIG_DIR = Path(__file__).resolve().parent / "configs"


def report(checks):
    for check, passed in checks.items():
        print(f"  {'✅' if passed else '❌'} {check}")
    return all(checks.values())


def validate_dimension():
    """Moran solve against log N / log(1/ratio)."""
    print("🔍 Similarity dimension...")
    try:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(20):
            count = int(rng.integers(2, 9))
            ratio = float(rng.uniform(0.05, 0.95 / count))
            maps = [Similitude.on_line(ratio, i / count) for i in range(count)]
            worst = max(worst, abs(similarity_dimension(maps) - np.log(count) / np.log(1.0 / ratio)))
        return report({f"20 equal-ratio systems within 1e-10 (worst {worst:.2e})": worst <= 1e-10})
    except Exception as e:
        print(f"  ❌ Error: {e}")
        return False


def validate_fourier():
    """Cantor transform against its infinite product."""
    print("\n🔍 Cantor Fourier transform...")
    try:
        transform = SelfSimilarTransform(cantor(), tol=1e-13, max_depth=200)
        xi = np.geomspace(1.0, 1e5, 200)
        product = np.exp(-0.5j * xi) * np.prod(np.cos(np.outer(xi, 3.0 ** -np.arange(1, 80))), axis=1)
        error = float(np.max(np.abs(transform(xi) - product)))
        base = abs(transform(np.array([np.pi]))[0])
        drift = max(abs(abs(transform(np.array([3.0 ** m * np.pi]))[0]) - base) for m in range(9))
        return report({
            f"product formula within 1e-10 (max error {error:.2e})": error <= 1e-10,
            f"no decay along 3^m pi (drift {drift:.2e})": drift <= 1e-9,
        })
    except Exception as e:
        print(f"  ❌ Error: {e}")
        return False


def validate_configs():
    """Every shipped config through the verify stage."""
    print("\n🔍 Shipped experiment configs...")
    checks = {}
    for path in sorted(CONFIG_DIR.glob("*.toml")):
        try:
            config = load_config(path)
            results = Experiment(config, threads=1).run("verify")
            constants = ", ".join(f"{r.theorem_id.value} C = {r.empirical_C:.4g}" for r in results.verdicts)
            checks[f"{path.stem}: {constants}"] = results.exit_code == 0
        except Exception as e:
            checks[f"{path.stem}: {e}"] = False
    return report(checks)


def validate_determinism():
    """Byte-identical CSV output for 1 and 8 threads."""
    print("\n🔍 Determinism across thread counts...")
    try:
        config = load_config(CONFIG_DIR / "cantor_lower_bound.toml")
        with tempfile.TemporaryDirectory() as tmp:
            outputs = {}
            for threads in (1, 8):
                out = Path(tmp) / f"threads{threads}"
                experiment = Experiment(config, threads)
                results = experiment.run("verify")
                ReportWriter(out).write_all(config, results, experiment.header())
                outputs[threads] = {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.csv"))}
            same = outputs[1] == outputs[8]
        return report({f"{len(outputs[1])} CSV files identical": same})
    except Exception as e:
        print(f"  ❌ Error: {e}")
        return False


def main():
    print("=" * 60)
    print("🚀 ACCEPTANCE RUN")
    print("=" * 60)

    results = {
        "Similarity dimension": validate_dimension(),
        "Fourier transform": validate_fourier(),
        "Experiment configs": validate_configs(),
        "Determinism": validate_determinism(),
    }

    print("\n" + "=" * 60)
    print("📊 RESULT")
    print("=" * 60)

    for component, passed in results.items():
        status = "✅ PASSED" if passed else "❌ FAILED"
        print(f"{component:.<40} {status}")

    if all(results.values()):
        print("\n🎉 ALL CHECKS PASSED")
        return 0
    print("\n⚠️  SOME CHECKS FAILED, see the lines marked ❌")
    return 1


if __name__ == "__main__":
    sys.exit(main())
