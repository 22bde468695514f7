from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def pytest_collection_modifyitems(config, items):
    # keep the acceptance suite last so its summary lines close the log
    items.sort(key=lambda item: "test_acceptance" in item.nodeid)
