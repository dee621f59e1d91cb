from setuptools import setup, find_packages

setup(
    name="pepbcd",
    version="0.3.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    python_requires=">=3.10",
    install_requires=[
        "typer[all]",
        "rich",
        "sqlalchemy",
        "pandas",
        "python-dotenv",
        "numpy",
        "scipy",
        "cvxpy",
        "clarabel",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    entry_points={
        "console_scripts": [
            "pepbcd=pepbcd.cli:app",
        ],
    },
)
