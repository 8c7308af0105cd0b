from hypothesis import settings

settings.register_profile("ym", deadline=None, max_examples=60)
settings.load_profile("ym")
