from hypothesis import HealthCheck, settings

# Every property runs at least this many examples; interpreter-backed ones are slow per
# example, so the deadline is off.
settings.register_profile(
    'fjobf',
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile('fjobf')
