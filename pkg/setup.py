from setuptools import setup, find_packages

# Get the long description from the README file.
with open("Readme.md", encoding="utf-8") as file:
    long_description = file.read()

# List dependencies.
dependencies = [
    "multiprocess",
    "numpy<2.0.0",
    "pandas>=2.0.0",
    "pyparsing>=3.1.0",
    "python-sat>=1.8.dev0",
    "tabulate",
    "tomli; python_version<'3.11'",
    "tqdm",
]

# List development dependencies.
dev_dependencies = [
    "pytest",
    "hypothesis",
    "flake8",
    "sphinx",
    "mypy",
    "black",
]


# Setup.
setup(
    name="ftlearn",
    version="0.1.0",
    description="Learning first-order temporal formulas from planning traces via MaxSAT",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "experiments"]),
    package_data={
        "ftlearn.data": [
            "benchmarks/*/*.pddl",
            "benchmarks/*/instances/*.pddl",
            "benchmarks/*/*/*/*.plan",
        ],
    },
    python_requires=">=3.9",
    install_requires=dependencies,
    extras_require={"dev": dev_dependencies},
    entry_points={"console_scripts": ["ftlearn=ftlearn.cli:main"]},
)
