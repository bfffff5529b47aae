"""Notice-and-choice privacy user agent.

Machine-readable site privacy disclosures (PPF) are fetched and matched
against the user's preference rules (APR); an HTTP forward proxy enforces
the resulting decision with four escalating actions, and a user data
repository feeds coupling-checked, practice-annotated forms.
"""

__version__ = "0.1.0"
