// jest config for the typescript sources
module.exports = {
  preset: "ts-jest",
  testEnvironment: "node",
};
