from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of a verification: truthy iff every obligation held."""

    name: str
    passed: bool = True
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def fail(self, message):
        self.passed = False
        self.failures.append(message)

    def require(self, condition, message):
        if not condition:
            self.fail(message)
        return condition

    def absorb(self, other, prefix=None):
        prefix = prefix or other.name
        for message in other.failures:
            self.fail(f"{prefix}: {message}")

    @property
    def first_failure(self):
        return self.failures[0] if self.failures else None

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "failures": list(self.failures),
            "details": dict(self.details),
        }

    def __bool__(self):
        return self.passed
