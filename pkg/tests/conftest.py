from hypothesis import HealthCheck, settings

# exact-arithmetic cases vary a lot in size; wall-clock deadlines only flake
settings.register_profile(
    "exact", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("exact")
