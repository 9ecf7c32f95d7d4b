"""Pattern-marked polygon dissections and outerplanar asymptotics."""

__version__ = "0.1.0"
