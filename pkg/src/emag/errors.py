"""Shared error taxonomy; the API maps these onto HTTP statuses."""


class EmagError(Exception):
    pass


class ContractViolation(EmagError):
    """Caller broke an operation contract (bad weight, bad rating, ...)."""


class NotFound(EmagError):
    """Referenced entity (user, content, keyword) does not exist."""


class Conflict(EmagError):
    """State already exists in a way the operation cannot merge."""
