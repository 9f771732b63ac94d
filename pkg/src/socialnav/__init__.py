"""Socially-aware local planning: context classification selects social
objectives, and a Pareto-based selector picks trajectories that respect
personal space, compared against a weighted-sum planner."""

__version__ = "0.1.0"
