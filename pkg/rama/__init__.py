"""rama: explicit Ramanujan complex quotients and checks of their spectral,
mixing, chromatic and injectivity-radius properties."""

__version__ = "0.1.0"
