"""Lower and upper predictive probabilities under Dirichlet near-ignorance priors."""

__version__ = "0.1.0"
