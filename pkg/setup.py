"""
Playground Workbench Setup Configuration
Language-conditioned reward learning and goal-conditioned agents for the Playground world
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="playground-workbench",
    version="1.0.0",
    author="Playground Workbench Team",
    description="Modular-attention reward functions, policies and evaluation for the Playground world",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={
        "playground_workbench.language": ["manifests/*.tsv"],
        "playground_workbench.environment": ["trajectory_schema.json"],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.8",
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "playground-workbench=playground_workbench.cli:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
