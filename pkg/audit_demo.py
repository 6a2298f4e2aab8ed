"""
DP Fairness Audit Demo

A demonstration script showing an epsilon sweep on a synthetic two-group
population followed by a Monte Carlo check of the bounds.
"""

from dp_audit.auditor import AuditConfig, DataSource, FairnessAuditor
from dp_audit.core.config import Settings
from dp_audit.core.logging import setup_logging
from dp_audit.ingestion.synthetic import SyntheticSpec


def main() -> None:
    settings = Settings()
    setup_logging(log_level=settings.log_level, log_format=settings.log_format)

    print("🔐 DP Fairness Audit Demo")
    print("=" * 50)

    auditor = FairnessAuditor(settings=settings)
    data = DataSource(
        synthetic=SyntheticSpec.two_groups(
            p=5, n=2000, proportions=(0.8, 0.2), seed=settings.seed
        )
    )
    config = AuditConfig(
        data=data,
        sensitivity=0.05,
        epsilon_grid=list(settings.epsilon_grid),
        zetas=[0.01],
    )

    print("\n📈 Running epsilon sweep (delta = 1/n^2)...")
    try:
        sweep, _ = auditor.audit(config)
    except Exception as e:
        print(f"❌ Audit failed: {e}")
        return

    print(f"   Non-private model norm: {sweep.model_norm:.4f}")
    for point in sweep.points:
        norm = point.norm_bounds[0]
        disagreement = point.disagreement[0]
        accuracy = point.bounds_at(0.01)[0]
        print(
            f"   eps={point.noise.epsilon:>5}: sigma={point.noise.sigma:.4f}"
            f"  norm in [{norm.lower:.3f}, {norm.upper:.3f}]"
            f"  disagreement <= {disagreement.bound_display:.3f}"
            f"  accuracy in [{accuracy.interval[0]:.3f}, "
            f"{accuracy.interval[1]:.3f}]"
        )

    print("\n🎲 Checking coverage at epsilon = 1 with 2000 sampled models...")
    check = config.model_copy(update={"epsilon_grid": [1.0], "zetas": [0.1]})
    _, _, results = auditor.simulate(check, m=2000)
    for result in results:
        mark = "✅" if result.passed else "❌"
        print(
            f"   {mark} {result.metric}: coverage {result.coverage:.4f} "
            f"(threshold {result.threshold:.4f})"
        )


if __name__ == "__main__":
    main()
