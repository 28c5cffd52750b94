"""crewsched: crew scheduling via integer programming and policy-guided objectives."""

__version__ = "0.1.0"
