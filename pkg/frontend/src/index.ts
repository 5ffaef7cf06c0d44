export * from "./protocol.js";
export * from "./connection.js";
export * from "./dialog.js";
export * from "./shortcuts.js";
export * from "./announcer.js";
export * from "./client.js";
export * from "./transports.js";
