class BpireError(Exception):
    exit_code: int = 1


class DomainError(BpireError, ValueError):
    pass


class InvalidLawError(DomainError):
    def __init__(self, family: str, parameter: str, value: object, expected: str):
        self.family = family
        self.parameter = parameter
        self.value = value
        super().__init__(f'invalid {family} law: {parameter}={value!r}, expected {expected}')


class FitError(DomainError):
    pass


class ConfigError(BpireError):
    exit_code = 1

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        location = ''
        if key is not None:
            location = f' (key `{key}`' + (f', line {line})' if line is not None else ')')
        super().__init__(message + location)


class NumericError(BpireError):
    exit_code = 2


class PopulationOverflowError(NumericError):
    pass


class NoSampleError(NumericError):
    pass


class IdentityViolation(BpireError):
    exit_code = 3
